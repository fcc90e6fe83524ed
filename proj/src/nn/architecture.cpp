#include "dfi/nn/architecture.hpp"

#include <string>

#include "dfi/errors.hpp"

namespace dfi::nn {

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
  }
  return "?";
}

std::vector<Shape3> Architecture::shapes() const {
  if (input.channels < 1 || input.height < 1 || input.width < 1) {
    throw ContractError("architecture: empty input shape");
  }
  std::vector<Shape3> out{input};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    Shape3 s = out.back();
    const std::string where = "architecture layer " + std::to_string(i) + " (" +
                              std::string(to_string(l.kind)) + "): ";
    if (l.in_channels != s.channels) throw ContractError(where + "input channel mismatch");
    switch (l.kind) {
      case LayerKind::conv:
        if (l.kernel < 1 || l.kernel % 2 == 0) throw ContractError(where + "kernel must be odd");
        if (l.out_channels < 1) throw ContractError(where + "no output channels");
        s.channels = l.out_channels;
        break;
      case LayerKind::relu:
        if (l.out_channels != l.in_channels) throw ContractError(where + "channel change");
        break;
      case LayerKind::maxpool:
        if (l.out_channels != l.in_channels) throw ContractError(where + "channel change");
        if (s.height % 2 != 0 || s.width % 2 != 0) throw ContractError(where + "odd extent");
        s.height /= 2;
        s.width /= 2;
        break;
    }
    out.push_back(s);
  }
  return out;
}

std::size_t Architecture::conv_count() const {
  std::size_t n = 0;
  for (const LayerSpec& l : layers) n += l.kind == LayerKind::conv ? 1 : 0;
  return n;
}

namespace {

Architecture pattern(Shape3 input, int w) {
  using L = LayerSpec;
  return {input,
          {L::conv(3, w, 5),          L::relu(w),           L::maxpool(w),
           L::conv(w, 2 * w, 5),      L::relu(2 * w),       L::maxpool(2 * w),
           L::conv(2 * w, 4 * w, 3),  L::relu(4 * w),       L::conv(4 * w, 4 * w, 3),
           L::relu(4 * w),            L::conv(4 * w, 4 * w, 3), L::relu(4 * w),
           L::conv(4 * w, 8 * w, 3),  L::relu(8 * w),       L::conv(8 * w, 8 * w, 1),
           L::relu(8 * w),            L::conv(8 * w, 14, 1)}};
}

}  // namespace

Architecture Architecture::full() { return pattern({3, 256, 256}, 16); }

Architecture Architecture::desk() { return pattern({3, 128, 128}, 8); }

}  // namespace dfi::nn

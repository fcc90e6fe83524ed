#include "dfi/nn/network.hpp"

namespace dfi::nn {

std::vector<float> image_to_tensor(const Image& img, int channels) {
  if (img.channels != channels && img.channels != 1) {
    throw ContractError("image_to_tensor: image has " + std::to_string(img.channels) +
                        " channels, network expects " + std::to_string(channels));
  }
  const std::size_t hw = static_cast<std::size_t>(img.width) * img.height;
  std::vector<float> out(hw * channels);
  for (int c = 0; c < channels; ++c) {
    const int src = img.channels == 1 ? 0 : c;
    for (std::size_t i = 0; i < hw; ++i) out[c * hw + i] = img.data[i * img.channels + src] - 0.5f;
  }
  return out;
}

HeatmapStack predict_heatmaps(Regressor& net, const Image& img) {
  const Shape3 in = net.input_shape();
  if (img.width != in.width || img.height != in.height) {
    throw ContractError("predict: image is " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + ", network expects " +
                        std::to_string(in.width) + "x" + std::to_string(in.height));
  }
  const std::vector<float> x = image_to_tensor(img, in.channels);
  const std::span<const float> y = net.forward(x);
  const Shape3 out = net.output_shape();
  HeatmapStack hm(out.width, out.height, out.channels);
  std::copy(y.begin(), y.end(), hm.data.begin());
  return hm;
}

}  // namespace dfi::nn

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace dfi::nn {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

enum class LayerKind { conv = 0, relu = 1, maxpool = 2 };

std::string_view to_string(LayerKind k);

/// conv: odd kernel, stride 1, same padding. maxpool: 2×2, stride 2.
/// relu and maxpool carry their channel count in both channel fields.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;

  static LayerSpec conv(int in, int out, int k) { return {LayerKind::conv, in, out, k}; }
  static LayerSpec relu(int c) { return {LayerKind::relu, c, c, 0}; }
  static LayerSpec maxpool(int c) { return {LayerKind::maxpool, c, c, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Architecture {
  Shape3 input;
  std::vector<LayerSpec> layers;

  /// Shape after every layer; throws ContractError on an inconsistent chain.
  std::vector<Shape3> shapes() const;
  Shape3 output() const { return shapes().back(); }
  std::size_t conv_count() const;

  /// Eight convolutions, two pools: 256×256×3 → 64×64×14.
  static Architecture full();
  /// Same layer pattern with 128×128 input and halved widths: → 32×32×14.
  static Architecture desk();

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

}  // namespace dfi::nn

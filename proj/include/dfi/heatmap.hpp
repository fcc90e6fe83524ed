#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dfi/errors.hpp"
#include "dfi/image.hpp"

namespace dfi {

/// Geometry of the Gaussian targets. Heatmap cell (i, j) corresponds to input
/// pixel (i·s, j·s) with s = input / stack.
struct GaussianSpec {
  double sigma = 1.5;  // standard deviation, in heatmap cells
  int stack_width = 64;
  int stack_height = 64;
  int input_width = 256;
  int input_height = 256;

  double scale_x() const { return static_cast<double>(input_width) / stack_width; }
  double scale_y() const { return static_cast<double>(input_height) / stack_height; }
  /// 1/(2πσ²), the value at an on-grid center.
  double peak_value() const;
  /// Throws ContractError when sigma ≤ 0 or the input is not a multiple of the stack.
  void validate() const;

  static GaussianSpec desk() { return {1.5, 32, 32, 128, 128}; }
};

/// K channel-major grids (channel, row, column).
struct HeatmapStack {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  HeatmapStack() = default;
  HeatmapStack(int w, int h, int k = kNumKeypoints)
      : width(w), height(h), channels(k), data(static_cast<std::size_t>(w) * h * k, 0.0f) {}

  float& at(int k, int j, int i) {
    return data[(static_cast<std::size_t>(k) * height + j) * width + i];
  }
  float at(int k, int j, int i) const {
    return data[(static_cast<std::size_t>(k) * height + j) * width + i];
  }
  std::span<const float> channel(int k) const {
    return {data.data() + static_cast<std::size_t>(k) * width * height,
            static_cast<std::size_t>(width) * height};
  }

  friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;
};

/// Gaussian target per keypoint; not-visible keypoints give all-zero channels.
HeatmapStack synthesize(const KeypointSet& kps, const GaussianSpec& spec);

/// Σ (gt − pred)² and its gradient 2(pred − gt) with respect to pred.
template <typename T>
double squared_error(std::span<const T> pred, std::span<const T> gt, std::span<T> grad) {
  if (pred.size() != gt.size() || grad.size() != pred.size()) {
    throw ContractError("squared_error: shape mismatch");
  }
  double loss = 0.0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const T diff = pred[n] - gt[n];
    loss += static_cast<double>(diff) * static_cast<double>(diff);
    grad[n] = T(2) * diff;
  }
  return loss;
}

struct LossAndGrad {
  double loss = 0.0;
  HeatmapStack grad;
};

LossAndGrad loss_and_grad(const HeatmapStack& pred, const HeatmapStack& gt);

struct DecodeOptions {
  /// Channels whose maximum is below this are reported not-visible.
  /// Defaults to 0.1 × spec.peak_value().
  std::optional<double> min_peak;
  /// Quadratic refinement around the argmax cell.
  bool subpixel = false;
};

/// Argmax per channel (first occurrence in row-major order), mapped back to
/// input pixels by ×s.
KeypointSet decode(const HeatmapStack& stack, const GaussianSpec& spec,
                   const DecodeOptions& opts = {});

}  // namespace dfi

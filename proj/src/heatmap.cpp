#include "dfi/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dfi {

double GaussianSpec::peak_value() const {
  return 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
}

void GaussianSpec::validate() const {
  if (!(sigma > 0.0)) throw ContractError("gaussian spec: sigma must be positive");
  if (stack_width < 1 || stack_height < 1 || input_width < 1 || input_height < 1) {
    throw ContractError("gaussian spec: sizes must be positive");
  }
  if (input_width % stack_width != 0 || input_height % stack_height != 0) {
    throw ContractError("gaussian spec: input size must be a multiple of the stack size");
  }
}

HeatmapStack synthesize(const KeypointSet& kps, const GaussianSpec& spec) {
  spec.validate();
  HeatmapStack out(spec.stack_width, spec.stack_height);
  const double norm = spec.peak_value();
  const double denom = 2.0 * spec.sigma * spec.sigma;
  std::vector<double> gx(static_cast<std::size_t>(out.width));
  std::vector<double> gy(static_cast<std::size_t>(out.height));
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!kps.visible[k]) continue;
    const double hx = kps.points[k].x / spec.scale_x();
    const double hy = kps.points[k].y / spec.scale_y();
    for (int i = 0; i < out.width; ++i) gx[i] = (hx - i) * (hx - i);
    for (int j = 0; j < out.height; ++j) gy[j] = (hy - j) * (hy - j);
    for (int j = 0; j < out.height; ++j) {
      for (int i = 0; i < out.width; ++i) {
        out.at(k, j, i) = static_cast<float>(norm * std::exp(-(gx[i] + gy[j]) / denom));
      }
    }
  }
  return out;
}

LossAndGrad loss_and_grad(const HeatmapStack& pred, const HeatmapStack& gt) {
  if (pred.width != gt.width || pred.height != gt.height || pred.channels != gt.channels) {
    throw ContractError("loss_and_grad: heatmap shapes differ");
  }
  LossAndGrad out{0.0, HeatmapStack(pred.width, pred.height, pred.channels)};
  out.loss = squared_error<float>(pred.data, gt.data, out.grad.data);
  return out;
}

namespace {

// Vertex offset of the parabola through (−1, a), (0, b), (1, c).
double parabola_offset(double a, double b, double c) {
  const double curvature = a - 2.0 * b + c;
  if (curvature >= 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
}

}  // namespace

KeypointSet decode(const HeatmapStack& stack, const GaussianSpec& spec, const DecodeOptions& opts) {
  const double threshold = opts.min_peak.value_or(0.1 * spec.peak_value());
  KeypointSet out;
  const int w = stack.width;
  const int h = stack.height;
  for (int k = 0; k < std::min(stack.channels, kNumKeypoints); ++k) {
    const std::span<const float> ch = stack.channel(k);
    std::size_t best = 0;
    for (std::size_t n = 1; n < ch.size(); ++n) {
      if (ch[n] > ch[best]) best = n;
    }
    const int bi = static_cast<int>(best % static_cast<std::size_t>(w));
    const int bj = static_cast<int>(best / static_cast<std::size_t>(w));
    double hx = bi;
    double hy = bj;
    if (opts.subpixel) {
      if (bi > 0 && bi < w - 1) {
        hx += parabola_offset(stack.at(k, bj, bi - 1), ch[best], stack.at(k, bj, bi + 1));
      }
      if (bj > 0 && bj < h - 1) {
        hy += parabola_offset(stack.at(k, bj - 1, bi), ch[best], stack.at(k, bj + 1, bi));
      }
    }
    out.points[k] = {hx * spec.scale_x(), hy * spec.scale_y()};
    out.visible[k] = static_cast<double>(ch[best]) >= threshold;
  }
  return out;
}

}  // namespace dfi

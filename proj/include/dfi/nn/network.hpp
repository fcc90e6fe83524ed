#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dfi/errors.hpp"
#include "dfi/heatmap.hpp"
#include "dfi/image.hpp"
#include "dfi/nn/architecture.hpp"
#include "dfi/nn/kernels.hpp"

namespace dfi::nn {

enum class Backend { reference, parallel };

template <typename T>
struct ConvParams {
  std::vector<T> weight;  // (out, in, k, k)
  std::vector<T> bias;    // (out)

  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

/// One entry per convolution, in declaration order.
template <typename T>
using ParamSet = std::vector<ConvParams<T>>;

template <typename T>
ParamSet<T> zero_params(const Architecture& arch) {
  ParamSet<T> out;
  for (const LayerSpec& l : arch.layers) {
    if (l.kind != LayerKind::conv) continue;
    out.push_back({std::vector<T>(static_cast<std::size_t>(l.out_channels) * l.in_channels *
                                  l.kernel * l.kernel),
                   std::vector<T>(static_cast<std::size_t>(l.out_channels))});
  }
  return out;
}

/// Feed-forward stack of conv / relu / maxpool layers with exact reverse-mode
/// gradients. Forward caches every activation for the following backward call.
template <typename T>
class Network {
 public:
  explicit Network(Architecture arch, Backend backend = Backend::parallel)
      : arch_(std::move(arch)), shapes_(arch_.shapes()), params_(zero_params<T>(arch_)),
        backend_(backend) {}

  const Architecture& architecture() const { return arch_; }
  Shape3 input_shape() const { return shapes_.front(); }
  Shape3 output_shape() const { return shapes_.back(); }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  Backend backend() const { return backend_; }
  void set_backend(Backend b) { backend_ = b; }

  /// Zero biases; kernel entries ~ N(0, 2/fan_in). With `zero_output` the
  /// last convolution starts at zero, so the first prediction is the empty
  /// heatmap instead of large random values.
  void init_he(std::uint64_t seed, bool zero_output = false) {
    std::mt19937_64 rng(seed);
    std::size_t p = 0;
    for (const LayerSpec& l : arch_.layers) {
      if (l.kind != LayerKind::conv) continue;
      const double fan_in = static_cast<double>(l.in_channels) * l.kernel * l.kernel;
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
      for (T& w : params_[p].weight) w = static_cast<T>(dist(rng));
      std::fill(params_[p].bias.begin(), params_[p].bias.end(), T(0));
      ++p;
    }
    if (zero_output && !params_.empty()) std::fill(params_.back().weight.begin(), params_.back().weight.end(), T(0));
  }

  std::span<const T> forward(std::span<const T> input) {
    if (input.size() != shapes_.front().size()) {
      throw ContractError("forward: input has " + std::to_string(input.size()) +
                          " values, network expects " + std::to_string(shapes_.front().size()));
    }
    acts_.resize(arch_.layers.size() + 1);
    argmax_.resize(arch_.layers.size());
    acts_[0].assign(input.begin(), input.end());
    std::size_t p = 0;
    for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
      const LayerSpec& l = arch_.layers[i];
      const Shape3 s = shapes_[i];
      acts_[i + 1].resize(shapes_[i + 1].size());
      const T* in = acts_[i].data();
      T* out = acts_[i + 1].data();
      switch (l.kind) {
        case LayerKind::conv:
          if (backend_ == Backend::reference) {
            reference::conv_forward(in, s, params_[p].weight.data(), params_[p].bias.data(),
                                    l.out_channels, l.kernel, out);
          } else {
            parallel::conv_forward(in, s, params_[p].weight.data(), params_[p].bias.data(),
                                   l.out_channels, l.kernel, out, ws_);
          }
          ++p;
          break;
        case LayerKind::relu:
          if (backend_ == Backend::reference) {
            reference::relu_forward(in, out, s.size());
          } else {
            parallel::relu_forward(in, out, s.size());
          }
          break;
        case LayerKind::maxpool:
          argmax_[i].resize(shapes_[i + 1].size());
          if (backend_ == Backend::reference) {
            reference::maxpool_forward(in, s, out, argmax_[i].data());
          } else {
            parallel::maxpool_forward(in, s, out, argmax_[i].data());
          }
          break;
      }
    }
    has_forward_ = true;
    return acts_.back();
  }

  /// Adds d(loss)/d(params) to `grads` given d(loss)/d(output).
  void backward(std::span<const T> upstream, ParamSet<T>& grads) {
    if (!has_forward_) throw ContractError("backward: no cached forward pass");
    if (upstream.size() != shapes_.back().size()) {
      throw ContractError("backward: upstream gradient shape mismatch");
    }
    if (grads.size() != params_.size()) throw ContractError("backward: gradient set mismatch");
    grad_a_.assign(upstream.begin(), upstream.end());
    std::size_t p = params_.size();
    for (std::size_t i = arch_.layers.size(); i-- > 0;) {
      const LayerSpec& l = arch_.layers[i];
      const Shape3 s = shapes_[i];
      const bool need_input_grad = i > 0;
      if (need_input_grad) grad_b_.resize(s.size());
      T* gin = need_input_grad ? grad_b_.data() : nullptr;
      switch (l.kind) {
        case LayerKind::conv: {
          --p;
          if (backend_ == Backend::reference) {
            reference::conv_backward(acts_[i].data(), s, params_[p].weight.data(), l.out_channels,
                                     l.kernel, grad_a_.data(), gin, grads[p].weight.data(),
                                     grads[p].bias.data());
          } else {
            parallel::conv_backward(acts_[i].data(), s, params_[p].weight.data(), l.out_channels,
                                    l.kernel, grad_a_.data(), gin, grads[p].weight.data(),
                                    grads[p].bias.data(), ws_);
          }
          break;
        }
        case LayerKind::relu:
          if (gin == nullptr) break;
          if (backend_ == Backend::reference) {
            reference::relu_backward(acts_[i + 1].data(), grad_a_.data(), gin, s.size());
          } else {
            parallel::relu_backward(acts_[i + 1].data(), grad_a_.data(), gin, s.size());
          }
          break;
        case LayerKind::maxpool:
          if (gin == nullptr) break;
          if (backend_ == Backend::reference) {
            reference::maxpool_backward(grad_a_.data(), argmax_[i].data(), argmax_[i].size(), gin,
                                        s.size());
          } else {
            parallel::maxpool_backward(grad_a_.data(), argmax_[i].data(), argmax_[i].size(), gin,
                                       s.size());
          }
          break;
      }
      if (need_input_grad) std::swap(grad_a_, grad_b_);
    }
  }

  /// Output of layer `i` from the last forward call (0 is the input).
  std::span<const T> activation(std::size_t i) const { return acts_.at(i); }
  /// Winning input index per output of max-pool layer `i`; empty otherwise.
  std::span<const std::size_t> pool_argmax(std::size_t i) const { return argmax_.at(i); }

  ParamSet<T> backward(std::span<const T> upstream) {
    ParamSet<T> grads = zero_params<T>(arch_);
    backward(upstream, grads);
    return grads;
  }

 private:
  Architecture arch_;
  std::vector<Shape3> shapes_;
  ParamSet<T> params_;
  Backend backend_;
  std::vector<std::vector<T>> acts_;
  std::vector<std::vector<std::size_t>> argmax_;
  bool has_forward_ = false;
  parallel::Workspace<T> ws_;
  std::vector<T> grad_a_;
  std::vector<T> grad_b_;
};

/// The trainable heatmap regressor.
using Regressor = Network<float>;

/// Channel-major copy of an interleaved image shifted by −0.5, so inputs
/// are centred on zero. Gray images are replicated across `channels`.
std::vector<float> image_to_tensor(const Image& img, int channels);

/// Runs the regressor on an image of the architecture's input size.
HeatmapStack predict_heatmaps(Regressor& net, const Image& img);

}  // namespace dfi::nn

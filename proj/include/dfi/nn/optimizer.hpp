#pragma once

#include <cmath>
#include <string>

#include "dfi/errors.hpp"
#include "dfi/nn/network.hpp"

namespace dfi::nn {

namespace detail {

template <typename T>
void check_step_inputs(const ParamSet<T>& params, const ParamSet<T>& grads, const ParamSet<T>& state,
                       const char* who) {
  if (grads.size() != params.size() || state.size() != params.size()) {
    throw ContractError(std::string(who) + ": parameter set mismatch");
  }
  for (std::size_t p = 0; p < grads.size(); ++p) {
    if (grads[p].weight.size() != params[p].weight.size() ||
        grads[p].bias.size() != params[p].bias.size() ||
        state[p].weight.size() != params[p].weight.size() ||
        state[p].bias.size() != params[p].bias.size()) {
      throw ContractError(std::string(who) + ": shape mismatch in conv layer " + std::to_string(p));
    }
    for (const auto* v : {&grads[p].weight, &grads[p].bias}) {
      for (T g : *v) {
        if (!std::isfinite(static_cast<double>(g))) {
          throw DivergenceError("non-finite gradient in conv layer " + std::to_string(p) +
                                (v == &grads[p].weight ? " (weights)" : " (biases)"));
        }
      }
    }
  }
}

}  // namespace detail

/// Classical momentum: v ← momentum·v − lr·g; θ ← θ + v.
/// Throws DivergenceError naming the first convolution whose gradient is not
/// finite; nothing is updated in that case.
template <typename T>
void sgd_step(ParamSet<T>& params, const ParamSet<T>& grads, ParamSet<T>& velocity, double lr,
              double momentum) {
  detail::check_step_inputs(params, grads, velocity, "sgd_step");
  const T m = static_cast<T>(momentum);
  const T step = static_cast<T>(lr);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto update = [&](std::vector<T>& theta, const std::vector<T>& g, std::vector<T>& v) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        v[i] = m * v[i] - step * g[i];
        theta[i] += v[i];
      }
    };
    update(params[p].weight, grads[p].weight, velocity[p].weight);
    update(params[p].bias, grads[p].bias, velocity[p].bias);
  }
}

/// First and second moment estimates for adam_step.
template <typename T>
struct AdamState {
  ParamSet<T> m;
  ParamSet<T> v;
  long long steps = 0;
};

/// Adam with bias correction; beta1 doubles as the momentum coefficient.
/// Same divergence contract as sgd_step.
template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& state, double lr,
               double beta1, double beta2 = 0.999, double eps = 1e-8) {
  detail::check_step_inputs(params, grads, state.m, "adam_step");
  detail::check_step_inputs(params, grads, state.v, "adam_step");
  ++state.steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  const T b1 = static_cast<T>(beta1), b2 = static_cast<T>(beta2);
  const T step = static_cast<T>(lr * std::sqrt(c2) / c1);
  const T e = static_cast<T>(eps * std::sqrt(c2));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto update = [&](std::vector<T>& theta, const std::vector<T>& g, std::vector<T>& m, std::vector<T>& v) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = b1 * m[i] + (1 - b1) * g[i];
        v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
        theta[i] -= step * m[i] / (std::sqrt(v[i]) + e);
      }
    };
    update(params[p].weight, grads[p].weight, state.m[p].weight, state.v[p].weight);
    update(params[p].bias, grads[p].bias, state.m[p].bias, state.v[p].bias);
  }
}

}  // namespace dfi::nn

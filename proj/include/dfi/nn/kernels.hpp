#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "dfi/nn/architecture.hpp"
#include "dfi/nn/gemm.hpp"

namespace dfi::nn {

// Layer kernels on channel-major (C, H, W) tensors. Two interchangeable
// implementations share one signature set:
//   reference::  direct nested loops, serial; the ground truth in tests.
//   parallel::   im2col + packed GEMM with OpenMP work sharing.
// Convolutions are stride 1 with zero "same" padding; pooling is 2×2/2.
// Backward kernels accumulate into weight/bias gradients and overwrite the
// input gradient when one is requested.

namespace reference {

template <typename T>
void conv_forward(const T* in, Shape3 s, const T* weight, const T* bias, int out_channels,
                  int k, T* out) {
  const int pad = k / 2;
  for (int co = 0; co < out_channels; ++co) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        T sum = bias[co];
        for (int ci = 0; ci < s.channels; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y + ky - pad;
            if (iy < 0 || iy >= s.height) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x + kx - pad;
              if (ix < 0 || ix >= s.width) continue;
              sum += weight[((static_cast<std::size_t>(co) * s.channels + ci) * k + ky) * k + kx] *
                     in[(static_cast<std::size_t>(ci) * s.height + iy) * s.width + ix];
            }
          }
        }
        out[(static_cast<std::size_t>(co) * s.height + y) * s.width + x] = sum;
      }
    }
  }
}

template <typename T>
void conv_backward(const T* in, Shape3 s, const T* weight, int out_channels, int k,
                   const T* grad_out, T* grad_in, T* grad_weight, T* grad_bias) {
  const int pad = k / 2;
  if (grad_in != nullptr) std::fill(grad_in, grad_in + s.size(), T(0));
  for (int co = 0; co < out_channels; ++co) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        const T g = grad_out[(static_cast<std::size_t>(co) * s.height + y) * s.width + x];
        grad_bias[co] += g;
        for (int ci = 0; ci < s.channels; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = y + ky - pad;
            if (iy < 0 || iy >= s.height) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = x + kx - pad;
              if (ix < 0 || ix >= s.width) continue;
              const std::size_t wi = ((static_cast<std::size_t>(co) * s.channels + ci) * k + ky) * k + kx;
              const std::size_t ii = (static_cast<std::size_t>(ci) * s.height + iy) * s.width + ix;
              grad_weight[wi] += g * in[ii];
              if (grad_in != nullptr) grad_in[ii] += g * weight[wi];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void relu_forward(const T* in, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

/// Uses the forward output: the gradient passes where the output is positive.
template <typename T>
void relu_backward(const T* out, const T* grad_out, T* grad_in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) grad_in[i] = out[i] > T(0) ? grad_out[i] : T(0);
}

/// `argmax` receives the flat input index selected for every output cell
/// (first maximum in the order (0,0), (0,1), (1,0), (1,1)).
template <typename T>
void maxpool_forward(const T* in, Shape3 s, T* out, std::size_t* argmax) {
  const int oh = s.height / 2;
  const int ow = s.width / 2;
  for (int c = 0; c < s.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        std::size_t best = (static_cast<std::size_t>(c) * s.height + 2 * y) * s.width + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t i = (static_cast<std::size_t>(c) * s.height + 2 * y + dy) * s.width + 2 * x + dx;
            if (in[i] > in[best]) best = i;
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * oh + y) * ow + x;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
}

template <typename T>
void maxpool_backward(const T* grad_out, const std::size_t* argmax, std::size_t out_size,
                      T* grad_in, std::size_t in_size) {
  std::fill(grad_in, grad_in + in_size, T(0));
  for (std::size_t o = 0; o < out_size; ++o) grad_in[argmax[o]] += grad_out[o];
}

}  // namespace reference

namespace parallel {

/// Unfolds k×k neighbourhoods into rows (ci, ky, kx) × columns (y, x).
template <typename T>
void im2col(const T* in, Shape3 s, int k, T* col) {
  const int pad = k / 2;
  const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(s.height) * s.width;
  const int rows = s.channels * k * k;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int ci = r / (k * k);
    const int ky = (r / k) % k;
    const int kx = r % k;
    T* dst = col + r * hw;
    const T* src = in + static_cast<std::ptrdiff_t>(ci) * hw;
    for (int y = 0; y < s.height; ++y) {
      const int iy = y + ky - pad;
      T* drow = dst + static_cast<std::ptrdiff_t>(y) * s.width;
      if (iy < 0 || iy >= s.height) {
        std::fill(drow, drow + s.width, T(0));
        continue;
      }
      const T* srow = src + static_cast<std::ptrdiff_t>(iy) * s.width;
      const int shift = kx - pad;
      const int x0 = std::max(0, -shift);
      const int x1 = std::min(s.width, s.width - shift);
      std::fill(drow, drow + x0, T(0));
      std::copy(srow + x0 + shift, srow + x1 + shift, drow + x0);
      std::fill(drow + x1, drow + s.width, T(0));
    }
  }
}

/// Adjoint of im2col: folds columns back, summing overlaps into `out`.
template <typename T>
void col2im(const T* col, Shape3 s, int k, T* out) {
  const int pad = k / 2;
  const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(s.height) * s.width;
  // One thread per input channel keeps the summation order fixed.
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < s.channels; ++ci) {
    T* dst = out + static_cast<std::ptrdiff_t>(ci) * hw;
    std::fill(dst, dst + hw, T(0));
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + ((static_cast<std::ptrdiff_t>(ci) * k + ky) * k + kx) * hw;
        const int shift = kx - pad;
        const int x0 = std::max(0, -shift);
        const int x1 = std::min(s.width, s.width - shift);
        for (int y = 0; y < s.height; ++y) {
          const int iy = y + ky - pad;
          if (iy < 0 || iy >= s.height) continue;
          const T* srow = src + static_cast<std::ptrdiff_t>(y) * s.width;
          T* drow = dst + static_cast<std::ptrdiff_t>(iy) * s.width + shift;
          for (int x = x0; x < x1; ++x) drow[x] += srow[x];
        }
      }
    }
  }
}

/// Scratch memory reused across calls.
template <typename T>
struct Workspace {
  std::vector<T> col;
  std::vector<T> dcol;
  std::vector<T> weight_t;
};

template <typename T>
void conv_forward(const T* in, Shape3 s, const T* weight, const T* bias, int out_channels, int k,
                  T* out, Workspace<T>& ws) {
  const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(s.height) * s.width;
  const std::ptrdiff_t kc = static_cast<std::ptrdiff_t>(s.channels) * k * k;
  const T* col = in;
  if (k > 1) {
    ws.col.resize(static_cast<std::size_t>(kc * hw));
    im2col(in, s, k, ws.col.data());
    col = ws.col.data();
  }
  gemm_nn<T>(out_channels, hw, kc, weight, col, out);
#pragma omp parallel for schedule(static)
  for (int co = 0; co < out_channels; ++co) {
    T* row = out + static_cast<std::ptrdiff_t>(co) * hw;
    const T b = bias[co];
    for (std::ptrdiff_t i = 0; i < hw; ++i) row[i] += b;
  }
}

template <typename T>
void conv_backward(const T* in, Shape3 s, const T* weight, int out_channels, int k,
                   const T* grad_out, T* grad_in, T* grad_weight, T* grad_bias, Workspace<T>& ws) {
  const std::ptrdiff_t hw = static_cast<std::ptrdiff_t>(s.height) * s.width;
  const std::ptrdiff_t kc = static_cast<std::ptrdiff_t>(s.channels) * k * k;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < out_channels; ++co) {
    const T* row = grad_out + static_cast<std::ptrdiff_t>(co) * hw;
    T sum = T(0);
    for (std::ptrdiff_t i = 0; i < hw; ++i) sum += row[i];
    grad_bias[co] += sum;
  }
  const T* col = in;
  if (k > 1) {
    ws.col.resize(static_cast<std::size_t>(kc * hw));
    im2col(in, s, k, ws.col.data());
    col = ws.col.data();
  }
  gemm_nt<T>(out_channels, kc, hw, grad_out, col, grad_weight, true);
  if (grad_in == nullptr) return;

  ws.weight_t.resize(static_cast<std::size_t>(kc * out_channels));
  for (int co = 0; co < out_channels; ++co)
    for (std::ptrdiff_t r = 0; r < kc; ++r)
      ws.weight_t[static_cast<std::size_t>(r * out_channels + co)] = weight[co * kc + r];
  if (k == 1) {
    gemm_nn<T>(kc, hw, out_channels, ws.weight_t.data(), grad_out, grad_in);
    return;
  }
  ws.dcol.resize(static_cast<std::size_t>(kc * hw));
  gemm_nn<T>(kc, hw, out_channels, ws.weight_t.data(), grad_out, ws.dcol.data());
  col2im(ws.dcol.data(), s, k, grad_in);
}

template <typename T>
void relu_forward(const T* in, T* out, std::size_t n) {
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <typename T>
void relu_backward(const T* out, const T* grad_out, T* grad_in, std::size_t n) {
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < n; ++i) grad_in[i] = out[i] > T(0) ? grad_out[i] : T(0);
}

template <typename T>
void maxpool_forward(const T* in, Shape3 s, T* out, std::size_t* argmax) {
  const int oh = s.height / 2;
  const int ow = s.width / 2;
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < s.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      const std::size_t r0 = (static_cast<std::size_t>(c) * s.height + 2 * y) * s.width;
      const std::size_t r1 = r0 + s.width;
      for (int x = 0; x < ow; ++x) {
        const std::size_t cand[4] = {r0 + 2 * x, r0 + 2 * x + 1, r1 + 2 * x, r1 + 2 * x + 1};
        std::size_t best = cand[0];
        for (int t = 1; t < 4; ++t) {
          if (in[cand[t]] > in[best]) best = cand[t];
        }
        const std::size_t o = (static_cast<std::size_t>(c) * oh + y) * ow + x;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
}

/// 2×2 windows do not overlap, so each input cell receives at most one write.
template <typename T>
void maxpool_backward(const T* grad_out, const std::size_t* argmax, std::size_t out_size,
                      T* grad_in, std::size_t in_size) {
  std::fill(grad_in, grad_in + in_size, T(0));
#pragma omp parallel for schedule(static)
  for (std::size_t o = 0; o < out_size; ++o) grad_in[argmax[o]] = grad_out[o];
}

}  // namespace parallel

}  // namespace dfi::nn

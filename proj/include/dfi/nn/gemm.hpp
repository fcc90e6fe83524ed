#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace dfi::nn {

// Row-major dense products used by the im2col convolution path.
// Every output element is reduced over k in a fixed order, so results do not
// depend on the OpenMP thread count.

namespace detail {

constexpr std::ptrdiff_t kPanel = 32;  // columns held in registers per micro-tile
constexpr std::ptrdiff_t kRows = 4;    // rows per micro-tile

template <typename T>
inline void micro_tile(std::ptrdiff_t rows, std::ptrdiff_t K, const T* a, std::ptrdiff_t lda,
                       const T* packed, T* c, std::ptrdiff_t ldc, std::ptrdiff_t cols,
                       bool accumulate) {
  T acc[kRows][kPanel] = {};
  if (rows == kRows) {
    for (std::ptrdiff_t k = 0; k < K; ++k) {
      const T* b = packed + k * kPanel;
      const T a0 = a[0 * lda + k], a1 = a[1 * lda + k], a2 = a[2 * lda + k], a3 = a[3 * lda + k];
#pragma omp simd
      for (std::ptrdiff_t j = 0; j < kPanel; ++j) {
        acc[0][j] += a0 * b[j];
        acc[1][j] += a1 * b[j];
        acc[2][j] += a2 * b[j];
        acc[3][j] += a3 * b[j];
      }
    }
  } else {
    for (std::ptrdiff_t k = 0; k < K; ++k) {
      const T* b = packed + k * kPanel;
      for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const T ar = a[r * lda + k];
#pragma omp simd
        for (std::ptrdiff_t j = 0; j < kPanel; ++j) acc[r][j] += ar * b[j];
      }
    }
  }
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    T* crow = c + r * ldc;
    if (accumulate) {
      for (std::ptrdiff_t j = 0; j < cols; ++j) crow[j] += acc[r][j];
    } else {
      for (std::ptrdiff_t j = 0; j < cols; ++j) crow[j] = acc[r][j];
    }
  }
}

}  // namespace detail

/// C[M×N] (+)= A[M×K] · B[K×N]
template <typename T>
void gemm_nn(std::ptrdiff_t M, std::ptrdiff_t N, std::ptrdiff_t K, const T* A, const T* B, T* C,
             bool accumulate = false) {
  using detail::kPanel;
  using detail::kRows;
  const std::ptrdiff_t panels = (N + kPanel - 1) / kPanel;
#pragma omp parallel
  {
    std::vector<T> packed(static_cast<std::size_t>(K * kPanel));
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < panels; ++p) {
      const std::ptrdiff_t n0 = p * kPanel;
      const std::ptrdiff_t cols = std::min(kPanel, N - n0);
      for (std::ptrdiff_t k = 0; k < K; ++k) {
        const T* src = B + k * N + n0;
        T* dst = packed.data() + k * kPanel;
        std::ptrdiff_t j = 0;
        for (; j < cols; ++j) dst[j] = src[j];
        for (; j < kPanel; ++j) dst[j] = T(0);
      }
      for (std::ptrdiff_t i0 = 0; i0 < M; i0 += kRows) {
        detail::micro_tile(std::min(kRows, M - i0), K, A + i0 * K, K, packed.data(),
                           C + i0 * N + n0, N, cols, accumulate);
      }
    }
  }
}

/// C[M×N] (+)= A[M×K] · B[N×K]ᵀ, i.e. dot products of rows of A with rows of B.
template <typename T>
void gemm_nt(std::ptrdiff_t M, std::ptrdiff_t N, std::ptrdiff_t K, const T* A, const T* B, T* C,
             bool accumulate = false) {
  constexpr std::ptrdiff_t kBlk = 4;
  constexpr std::ptrdiff_t kLanes = 16;
  const std::ptrdiff_t k_main = K - K % kLanes;
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t i0 = 0; i0 < M; i0 += kBlk) {
    for (std::ptrdiff_t j0 = 0; j0 < N; j0 += kBlk) {
      const std::ptrdiff_t ni = std::min(kBlk, M - i0);
      const std::ptrdiff_t nj = std::min(kBlk, N - j0);
      const T* a[kBlk];
      const T* b[kBlk];
      for (std::ptrdiff_t r = 0; r < kBlk; ++r) {
        a[r] = A + std::min(i0 + r, M - 1) * K;
        b[r] = B + std::min(j0 + r, N - 1) * K;
      }
      T acc[kBlk][kBlk][kLanes] = {};
      for (std::ptrdiff_t k = 0; k < k_main; k += kLanes) {
        for (std::ptrdiff_t r = 0; r < kBlk; ++r) {
          for (std::ptrdiff_t q = 0; q < kBlk; ++q) {
#pragma omp simd
            for (std::ptrdiff_t l = 0; l < kLanes; ++l) acc[r][q][l] += a[r][k + l] * b[q][k + l];
          }
        }
      }
      for (std::ptrdiff_t r = 0; r < ni; ++r) {
        for (std::ptrdiff_t q = 0; q < nj; ++q) {
          T sum = T(0);
          for (std::ptrdiff_t l = 0; l < kLanes; ++l) sum += acc[r][q][l];
          for (std::ptrdiff_t k = k_main; k < K; ++k) sum += a[r][k] * b[q][k];
          T& out = C[(i0 + r) * N + (j0 + q)];
          out = accumulate ? out + sum : sum;
        }
      }
    }
  }
}

}  // namespace dfi::nn

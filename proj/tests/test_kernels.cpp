#include <cmath>

#include "doctest.h"
#include "dfi/nn/kernels.hpp"
#include "test_util.hpp"

using namespace dfi::nn;
using dfi::test::random_vector;

namespace {

template <typename T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

struct ConvCase {
  Shape3 s;
  int out;
  int k;
};

}  // namespace

TEST_CASE_TEMPLATE("gemm_nn and gemm_nt agree with naive products", T, float, double) {
  for (auto [M, N, K] : {std::array<int, 3>{1, 1, 1}, {5, 33, 7}, {17, 70, 40}, {4, 32, 3}, {9, 100, 75}}) {
    const auto A = random_vector<T>(std::size_t(M) * K, 1);
    const auto B = random_vector<T>(std::size_t(K) * N, 2);
    const auto Bt = random_vector<T>(std::size_t(N) * K, 3);
    std::vector<T> ref(std::size_t(M) * N), ref_t(std::size_t(M) * N);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < N; ++j) {
        double s = 0, st = 0;
        for (int k = 0; k < K; ++k) {
          s += double(A[i * K + k]) * B[k * N + j];
          st += double(A[i * K + k]) * Bt[j * K + k];
        }
        ref[i * N + j] = T(s);
        ref_t[i * N + j] = T(st + 1.0);
      }
    std::vector<T> C(std::size_t(M) * N, T(7));
    gemm_nn<T>(M, N, K, A.data(), B.data(), C.data());
    CHECK(max_abs_diff(C, ref) < 1e-4);
    std::vector<T> Ct(std::size_t(M) * N, T(1));
    gemm_nt<T>(M, N, K, A.data(), Bt.data(), Ct.data(), true);
    CHECK(max_abs_diff(Ct, ref_t) < 1e-4);
  }
}

TEST_CASE_TEMPLATE("parallel convolution matches the reference loops", T, float, double) {
  const double tol = std::is_same_v<T, float> ? 1e-4 : 1e-12;
  for (const ConvCase& c : {ConvCase{{3, 9, 11}, 4, 5}, ConvCase{{5, 8, 8}, 7, 3},
                            ConvCase{{6, 7, 5}, 3, 1}, ConvCase{{1, 1, 1}, 2, 3},
                            ConvCase{{2, 4, 6}, 5, 7}}) {
    CAPTURE(c.k);
    const std::size_t wn = std::size_t(c.out) * c.s.channels * c.k * c.k;
    const Shape3 os{c.out, c.s.height, c.s.width};
    const auto in = random_vector<T>(c.s.size(), 10);
    const auto w = random_vector<T>(wn, 11);
    const auto b = random_vector<T>(std::size_t(c.out), 12);
    const auto g = random_vector<T>(os.size(), 13);

    std::vector<T> out_r(os.size()), out_p(os.size());
    reference::conv_forward(in.data(), c.s, w.data(), b.data(), c.out, c.k, out_r.data());
    parallel::Workspace<T> ws;
    parallel::conv_forward(in.data(), c.s, w.data(), b.data(), c.out, c.k, out_p.data(), ws);
    CHECK(max_abs_diff(out_r, out_p) < tol);

    // Gradients accumulate onto existing values; input gradients are overwritten.
    std::vector<T> gi_r(c.s.size(), T(9)), gi_p(c.s.size(), T(-9));
    std::vector<T> gw_r(wn, T(0.5)), gw_p(wn, T(0.5));
    std::vector<T> gb_r(std::size_t(c.out), T(1)), gb_p(std::size_t(c.out), T(1));
    reference::conv_backward(in.data(), c.s, w.data(), c.out, c.k, g.data(), gi_r.data(),
                             gw_r.data(), gb_r.data());
    parallel::conv_backward(in.data(), c.s, w.data(), c.out, c.k, g.data(), gi_p.data(),
                            gw_p.data(), gb_p.data(), ws);
    CHECK(max_abs_diff(gi_r, gi_p) < tol);
    CHECK(max_abs_diff(gw_r, gw_p) < tol);
    CHECK(max_abs_diff(gb_r, gb_p) < tol);

    // The input gradient is optional.
    std::vector<T> gw_n(wn, T(0.5)), gb_n(std::size_t(c.out), T(1));
    parallel::conv_backward(in.data(), c.s, w.data(), c.out, c.k, g.data(), static_cast<T*>(nullptr),
                            gw_n.data(), gb_n.data(), ws);
    CHECK(max_abs_diff(gw_n, gw_p) == 0.0);
  }
}

TEST_CASE("relu and maxpool kernels agree across implementations") {
  const Shape3 s{3, 6, 8};
  auto in = random_vector<float>(s.size(), 21);
  in[5] = in[4];  // a tie inside one window: first maximum wins
  std::vector<float> r1(s.size()), r2(s.size());
  reference::relu_forward(in.data(), r1.data(), s.size());
  parallel::relu_forward(in.data(), r2.data(), s.size());
  CHECK(r1 == r2);
  const auto g = random_vector<float>(s.size(), 22);
  std::vector<float> gr1(s.size()), gr2(s.size());
  reference::relu_backward(r1.data(), g.data(), gr1.data(), s.size());
  parallel::relu_backward(r2.data(), g.data(), gr2.data(), s.size());
  CHECK(gr1 == gr2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(gr1[i] == (in[i] > 0 ? g[i] : 0.0f));
  }

  const std::size_t on = s.size() / 4;
  std::vector<float> p1(on), p2(on);
  std::vector<std::size_t> a1(on), a2(on);
  reference::maxpool_forward(in.data(), s, p1.data(), a1.data());
  parallel::maxpool_forward(in.data(), s, p2.data(), a2.data());
  CHECK(p1 == p2);
  CHECK(a1 == a2);
  const auto go = random_vector<float>(on, 23);
  std::vector<float> gp1(s.size()), gp2(s.size(), 5.0f);
  reference::maxpool_backward(go.data(), a1.data(), on, gp1.data(), s.size());
  parallel::maxpool_backward(go.data(), a2.data(), on, gp2.data(), s.size());
  CHECK(gp1 == gp2);
}

TEST_CASE("maxpool picks the first maximum of each window") {
  const Shape3 s{1, 2, 2};
  const float in[4] = {1.0f, 3.0f, 3.0f, 2.0f};
  float out = 0;
  std::size_t arg = 9;
  reference::maxpool_forward(in, s, &out, &arg);
  CHECK(out == 3.0f);
  CHECK(arg == 1);
}

TEST_CASE("1x1 convolution is a per-pixel channel mix") {
  const Shape3 s{2, 1, 2};
  const float in[4] = {1, 2, 3, 4};  // channel 0: 1 2, channel 1: 3 4
  const float w[2] = {10, 100};
  const float b[1] = {0.5f};
  float out[2];
  parallel::Workspace<float> ws;
  parallel::conv_forward(in, s, w, b, 1, 1, out, ws);
  CHECK(out[0] == doctest::Approx(310.5));
  CHECK(out[1] == doctest::Approx(420.5));
}

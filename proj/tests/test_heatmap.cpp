#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dfi/errors.hpp"
#include "dfi/heatmap.hpp"
#include "test_util.hpp"

using namespace dfi;

namespace {

KeypointSet at(Point2 p, int k = 0) {
  KeypointSet s;
  s.points[k] = p;
  s.visible[k] = true;
  return s;
}

double channel_sum(const HeatmapStack& h, int k) {
  const auto c = h.channel(k);
  return std::accumulate(c.begin(), c.end(), 0.0);
}

}  // namespace

TEST_CASE("synthesize places a normalized Gaussian at x/s") {
  const GaussianSpec spec;  // σ 1.5, 64×64 from 256×256
  CHECK(spec.scale_x() == 4.0);
  CHECK(std::abs(spec.peak_value() - 0.070736) < 1e-6);

  const HeatmapStack h = synthesize(at({80, 120}), spec);  // cell (20, 30)
  CHECK(h.width == 64);
  CHECK(h.channels == kNumKeypoints);
  CHECK(std::abs(h.at(0, 30, 20) - 0.070736) < 1e-6);
  // 0.0707355·exp(−1/4.5)
  CHECK(std::abs(h.at(0, 30, 21) - 0.0566406) < 1e-6);
  CHECK(std::abs(h.at(0, 29, 20) - 0.0566406) < 1e-6);
  CHECK(channel_sum(h, 0) == doctest::Approx(1.0).epsilon(0.01));
  for (int k = 1; k < kNumKeypoints; ++k) CHECK(channel_sum(h, k) == 0.0);
}

TEST_CASE("synthesized channels have one maximum no larger than the on-grid peak") {
  const GaussianSpec spec;
  for (double x : {0.0, 13.0, 101.3, 199.9, 255.0}) {
    const HeatmapStack h = synthesize(at({x, 77.7}), spec);
    const auto c = h.channel(0);
    const float m = *std::max_element(c.begin(), c.end());
    CHECK(m > 0.0f);
    CHECK(m <= spec.peak_value() + 1e-9);
    CHECK(std::count(c.begin(), c.end(), m) <= 2);  // exactly half-way between cells can tie
  }
}

TEST_CASE("loss_and_grad") {
  HeatmapStack gt(4, 4), pred(4, 4);
  gt.at(3, 1, 2) = 0.5f;
  SUBCASE("equal stacks give zero loss and gradient") {
    const LossAndGrad r = loss_and_grad(gt, gt);
    CHECK(r.loss == 0.0);
    for (float g : r.grad.data) CHECK(g == 0.0f);
  }
  SUBCASE("a single cell off by 0.5") {
    pred = gt;
    pred.at(3, 1, 2) = 0.0f;
    const LossAndGrad r = loss_and_grad(pred, gt);
    CHECK(r.loss == doctest::Approx(0.25));
    CHECK(r.grad.at(3, 1, 2) == doctest::Approx(-1.0));
  }
  SUBCASE("scaling the discrepancy by c scales the loss by c squared") {
    for (std::size_t i = 0; i < pred.data.size(); ++i) pred.data[i] = gt.data[i] + 0.01f * i;
    const double base = loss_and_grad(pred, gt).loss;
    for (std::size_t i = 0; i < pred.data.size(); ++i) pred.data[i] = gt.data[i] + 3 * 0.01f * i;
    CHECK(loss_and_grad(pred, gt).loss == doctest::Approx(9 * base).epsilon(1e-5));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(loss_and_grad(HeatmapStack(4, 5), gt), ContractError);
  }
}

TEST_CASE("squared_error gradient matches central differences in double precision") {
  const auto pred = test::random_vector<double>(50, 1);
  const auto gt = test::random_vector<double>(50, 2);
  std::vector<double> grad(50);
  squared_error<double>(pred, gt, grad);
  std::vector<double> p = pred, scratch(50);
  double diff2 = 0, norm2 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-6;
    p[i] = pred[i] + h;
    const double lp = squared_error<double>(p, gt, scratch);
    p[i] = pred[i] - h;
    const double lm = squared_error<double>(p, gt, scratch);
    p[i] = pred[i];
    const double fd = (lp - lm) / (2 * h);
    diff2 += (fd - grad[i]) * (fd - grad[i]);
    norm2 += grad[i] * grad[i];
  }
  CHECK(std::sqrt(diff2 / norm2) <= 1e-6);
}

TEST_CASE("decode") {
  const GaussianSpec spec;
  SUBCASE("argmax cell maps back by the scale") {
    HeatmapStack h(64, 64);
    h.at(0, 40, 12) = 1.0f;
    const KeypointSet k = decode(h, spec);
    CHECK(k.points[0] == Point2{48, 160});
    CHECK(k.visible[0]);
  }
  SUBCASE("empty channels are not visible") {
    const KeypointSet k = decode(HeatmapStack(64, 64), spec);
    for (bool v : k.visible) CHECK_FALSE(v);
  }
  SUBCASE("ties resolve to the first cell in row-major order") {
    HeatmapStack h(64, 64);
    h.at(2, 5, 9) = 0.5f;
    h.at(2, 5, 3) = 0.5f;
    h.at(2, 7, 1) = 0.5f;
    CHECK(decode(h, spec).points[2] == Point2{12, 20});
  }
  SUBCASE("the visibility threshold defaults to a tenth of the peak") {
    HeatmapStack h(64, 64);
    h.at(0, 1, 1) = static_cast<float>(0.1 * spec.peak_value() * 1.001);
    h.at(1, 1, 1) = static_cast<float>(0.1 * spec.peak_value() * 0.999);
    const KeypointSet k = decode(h, spec);
    CHECK(k.visible[0]);
    CHECK_FALSE(k.visible[1]);
    CHECK(decode(h, spec, {0.5, false}).visible[0] == false);
  }
  SUBCASE("sub-pixel refinement recovers off-grid centers") {
    const HeatmapStack h = synthesize(at({101.0, 57.0}), spec);
    const KeypointSet coarse = decode(h, spec);
    const KeypointSet fine = decode(h, spec, {std::nullopt, true});
    CHECK(coarse.points[0] == Point2{100, 56});
    CHECK(std::abs(fine.points[0].x - 101.0) < 0.5);
    CHECK(std::abs(fine.points[0].y - 57.0) < 0.5);
  }
}

TEST_CASE("decode of synthesize stays within 3 px inside the decodable region") {
  // Cell centers span [0, (w-1)s]; any center within half a cell of that hull
  // quantizes by at most s/2 per axis.
  for (const GaussianSpec& spec : {GaussianSpec{}, GaussianSpec::desk()}) {
    const double hi = (spec.stack_width - 1 + 0.5) * spec.scale_x();
    double worst = 0.0;
    for (double y = 0.0; y <= hi; y += 1.75) {
      for (double x = 0.0; x <= hi; x += 0.5) {
        KeypointSet kps;
        kps.points[0] = {x, y};
        kps.points[1] = {hi - x, y};
        kps.visible[0] = kps.visible[1] = true;
        const KeypointSet d = decode(synthesize(kps, spec), spec);
        for (int k = 0; k < 2; ++k) {
          worst = std::max(worst, std::hypot(d.points[k].x - kps.points[k].x, d.points[k].y - kps.points[k].y));
        }
      }
    }
    CHECK(worst <= 3.0);
  }
}

TEST_CASE("Gaussian spec validation") {
  CHECK_THROWS_AS(synthesize({}, GaussianSpec{0.0, 64, 64, 256, 256}), ContractError);
  CHECK_THROWS_AS(synthesize({}, GaussianSpec{1.5, 60, 64, 256, 256}), ContractError);
  CHECK_NOTHROW(GaussianSpec::desk().validate());
  CHECK(GaussianSpec::desk().scale_x() == 4.0);
}

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dfi/errors.hpp"
#include "dfi/starnet.hpp"

using namespace dfi;
using std::numbers::pi;

namespace {

constexpr double kDeg = pi / 180.0;

KeypointSet random_face(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(20.0, 230.0);
  KeypointSet k;
  for (int i = 0; i < kNumKeypoints; ++i) {
    k.points[i] = {u(rng), u(rng)};
    k.visible[i] = true;
  }
  return k;
}

StarNet with_angles(std::initializer_list<double> degrees) {
  StarNet s;
  int i = 0;
  for (double d : degrees) {
    s.angles[i] = d * kDeg;
    s.valid[i] = true;
    ++i;
  }
  return s;
}

}  // namespace

TEST_CASE("build_starnet measures angles from the nose") {
  KeypointSet k;
  k.points[kNoseIndex] = {100, 100};
  k.visible[kNoseIndex] = true;
  k.points[0] = {130, 100};  // right of the nose
  k.points[1] = {100, 140};  // below (y down)
  k.points[2] = {60, 100};   // left: +π, never −π
  k.points[13] = {100, 50};  // above
  for (int i : {0, 1, 2, 13}) k.visible[i] = true;
  k.points[3] = {100, 100};  // coincides with the nose
  k.visible[3] = true;

  const StarNet s = build_starnet(k);
  CHECK(s.valid[0]);
  CHECK(s.angles[0] == 0.0);
  CHECK(s.angles[1] == doctest::Approx(pi / 2));
  CHECK(s.angles[2] == pi);
  CHECK(s.angles[12] == doctest::Approx(-pi / 2));  // slot 12 ↔ P14
  CHECK_FALSE(s.valid[3]);
  CHECK_FALSE(s.valid[4]);  // not visible
  CHECK(s.valid_count() == 4);
  CHECK(angle_keypoint(9) == 9);
  CHECK(angle_keypoint(10) == 11);

  k.visible[kNoseIndex] = false;
  CHECK_THROWS_AS(build_starnet(k), ContractError);
}

TEST_CASE("angles are invariant to translation and to scaling about the nose") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const KeypointSet k = random_face(rng);
    KeypointSet moved = k, scaled = k;
    const Point2 nose = k.points[kNoseIndex];
    const double s = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    for (int i = 0; i < kNumKeypoints; ++i) {
      moved.points[i] = {k.points[i].x + 7, k.points[i].y - 3};
      scaled.points[i] = {nose.x + s * (k.points[i].x - nose.x), nose.y + s * (k.points[i].y - nose.y)};
    }
    const StarNet a = build_starnet(k), b = build_starnet(moved), c = build_starnet(scaled);
    for (int j = 0; j < kNumAngles; ++j) {
      CHECK(std::abs(wrapped_delta(a.angles[j], b.angles[j])) <= 1e-12);
      CHECK(std::abs(wrapped_delta(a.angles[j], c.angles[j])) <= 1e-12);
    }
    const KeypointSet other = random_face(rng);
    const double tau = similarity(a, build_starnet(other)).tau;
    CHECK(std::abs(similarity(b, build_starnet(other)).tau - tau) <= 1e-12);
    CHECK(std::abs(similarity(c, build_starnet(other)).tau - tau) <= 1e-12);
  }
}

TEST_CASE("similarity sums angle differences over common valid entries") {
  SUBCASE("identical nets") {
    std::mt19937_64 rng(2);
    const StarNet a = build_starnet(random_face(rng));
    const Similarity s = similarity(a, a);
    CHECK(s.tau == 0.0);
    CHECK(s.common == kNumAngles);
  }
  SUBCASE("hand-summed example") {
    const Similarity s = similarity(with_angles({10, 20}), with_angles({13, 18}), true, 2);
    CHECK(s.tau == doctest::Approx(5 * kDeg));
    CHECK(s.tau == doctest::Approx(0.0873).epsilon(1e-3));
    CHECK(s.common == 2);
  }
  SUBCASE("wrap-around") {
    const StarNet a = with_angles({179}), b = with_angles({-179});
    CHECK(similarity(a, b, true, 1).tau == doctest::Approx(2 * kDeg));
    CHECK(similarity(a, b, false, 1).tau == doctest::Approx(358 * kDeg));
  }
  SUBCASE("too few common angles") {
    StarNet a = with_angles({1, 2, 3, 4, 5, 6});
    StarNet b = with_angles({1, 2, 3, 4, 5, 6});
    CHECK(similarity(a, b).common == 6);
    b.valid[5] = false;
    CHECK_THROWS_AS(similarity(a, b), ContractError);
  }
  SUBCASE("symmetry") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
      const StarNet a = build_starnet(random_face(rng)), b = build_starnet(random_face(rng));
      CHECK(similarity(a, b).tau == similarity(b, a).tau);
    }
  }
}

TEST_CASE("wrapped delta is a metric on the circle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int t = 0; t < 10000; ++t) {
    const double x = u(rng), y = u(rng), z = u(rng);
    CHECK(wrapped_delta(x, y) >= 0.0);
    CHECK(wrapped_delta(x, x) == 0.0);
    CHECK(wrapped_delta(x, y) == wrapped_delta(y, x));
    CHECK(wrapped_delta(x, z) <= wrapped_delta(x, y) + wrapped_delta(y, z) + 1e-12);
    CHECK(wrapped_delta(x, y) <= pi);
  }
}

TEST_CASE("rotating a face shifts every angle, so tau is not rotation invariant") {
  std::mt19937_64 rng(5);
  const KeypointSet k = random_face(rng);
  for (double rho_deg : {5.0, 30.0, 170.0, 200.0, -90.0}) {
    const double rho = rho_deg * kDeg;
    KeypointSet r = k;
    const Point2 n = k.points[kNoseIndex];
    for (int i = 0; i < kNumKeypoints; ++i) {
      const double dx = k.points[i].x - n.x, dy = k.points[i].y - n.y;
      r.points[i] = {n.x + std::cos(rho) * dx - std::sin(rho) * dy, n.y + std::sin(rho) * dx + std::cos(rho) * dy};
    }
    const double m = std::fmod(std::abs(rho), 2 * pi);
    const double expect = kNumAngles * std::min(m, 2 * pi - m);
    CHECK(similarity(build_starnet(k), build_starnet(r)).tau == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("identify picks the smallest tau with ties to the lowest subject id") {
  const StarNet probe = with_angles({0, 0, 0, 0, 0, 0});
  auto entry = [](int id, double tau) {
    // Spread tau evenly over six angles.
    const double d = tau / 6.0 / kDeg;
    return GalleryEntry{id, with_angles({d, d, d, d, d, d})};
  };
  SUBCASE("tie-break") {
    const std::vector<GalleryEntry> g = {entry(10, 0.5), entry(11, 0.2), entry(12, 0.9), entry(9, 0.2),
                                         entry(13, 0.7)};
    const Identification r = identify(probe, g);
    CHECK(r.subject_id == 9);
    REQUIRE(r.scores.size() == 5);
    CHECK(r.scores[1].tau == doctest::Approx(0.2));
    CHECK(r.scores[3].tau == doctest::Approx(0.2));
  }
  SUBCASE("ties resolve to the lower id regardless of gallery order") {
    const std::vector<GalleryEntry> g = {entry(10, 0.5), entry(2, 0.2), entry(12, 0.9), entry(7, 0.2)};
    CHECK(identify(probe, g).subject_id == 2);
  }
  SUBCASE("an identical entry wins with tau 0") {
    const std::vector<GalleryEntry> g = {entry(1, 0.3), {4, probe}};
    const Identification r = identify(probe, g);
    CHECK(r.subject_id == 4);
    CHECK(r.scores[1].tau == 0.0);
  }
  SUBCASE("single entry") {
    CHECK(identify(probe, {entry(3, 2.0)}).subject_id == 3);
  }
  SUBCASE("empty gallery") {
    CHECK_THROWS_AS(identify(probe, {}), ContractError);
  }
}

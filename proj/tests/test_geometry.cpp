#include <cmath>
#include <random>

#include "doctest.h"
#include "dfi/errors.hpp"
#include "dfi/geometry.hpp"
#include "dfi/png_io.hpp"
#include "test_util.hpp"

using namespace dfi;

namespace {

KeypointSet one_point(Point2 p, int index = 0) {
  KeypointSet k;
  k.points[index] = p;
  k.visible[index] = true;
  return k;
}

KeypointSet random_points(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, w - 1), uy(0.0, h - 1);
  KeypointSet k;
  for (int i = 0; i < kNumKeypoints; ++i) {
    k.points[i] = {ux(rng), uy(rng)};
    k.visible[i] = true;
  }
  return k;
}

void check_visible_in_bounds(const Transformed& t) {
  for (int i = 0; i < kNumKeypoints; ++i) {
    if (t.keypoints.visible[i]) CHECK(in_bounds(t.keypoints.points[i], t.image.width, t.image.height));
  }
}

}  // namespace

TEST_CASE("crop") {
  const Image img = test::random_image(256, 256, 3, 1);
  const KeypointSet kps = random_points(256, 256, 2);

  SUBCASE("full-image crop is the identity") {
    const Transformed t = crop(img, kps, {0, 0}, {256, 256});
    CHECK(t.image == img);
    CHECK(t.keypoints == kps);
  }
  SUBCASE("coordinates shift by the origin") {
    const Transformed t = crop(img, one_point({100, 120}), {4, 4}, {248, 248});
    CHECK(t.keypoints.points[0] == Point2{96, 116});
    CHECK(t.keypoints.visible[0]);
    CHECK(t.image.width == 248);
    CHECK(t.image.at(0, 0, 1) == img.at(4, 4, 1));
    CHECK(t.image.at(247, 247, 2) == img.at(251, 251, 2));
  }
  SUBCASE("points left outside become not-visible") {
    const Transformed t = crop(img, one_point({2, 2}), {4, 4}, {248, 248});
    CHECK_FALSE(t.keypoints.visible[0]);
  }
  SUBCASE("rectangles beyond the image are rejected") {
    CHECK_THROWS_AS(crop(img, kps, {10, 0}, {248, 248}), ContractError);
    CHECK_THROWS_AS(crop(img, kps, {-1, 0}, {16, 16}), ContractError);
    CHECK_THROWS_AS(crop(img, kps, {0, 0}, {0, 16}), ContractError);
  }
  SUBCASE("visible points stay in bounds") {
    for (int s = 0; s < 20; ++s) check_visible_in_bounds(crop(img, random_points(256, 256, s), {s, 2 * s}, {200, 150}));
  }
}

TEST_CASE("flip_horizontal") {
  const Image img = test::random_image(256, 200, 3, 3);
  const KeypointSet kps = random_points(256, 200, 4);

  SUBCASE("is an involution on pixels and keypoints") {
    const Transformed once = flip_horizontal(img, kps);
    const Transformed twice = flip_horizontal(once.image, once.keypoints);
    CHECK(twice.image == img);
    CHECK(twice.keypoints.visible == kps.visible);
    for (int i = 0; i < kNumKeypoints; ++i) {
      CHECK(twice.keypoints.points[i].x == doctest::Approx(kps.points[i].x));
      CHECK(twice.keypoints.points[i].y == kps.points[i].y);
    }
    CHECK(once.image.at(0, 5, 0) == img.at(255, 5, 0));
  }
  SUBCASE("mirrors x about the last pixel column") {
    const Transformed t = flip_horizontal(img, one_point({10, 50}, kNoseIndex));
    CHECK(t.keypoints.points[kNoseIndex] == Point2{245, 50});
  }
  SUBCASE("left and right labels trade places") {
    const Transformed t = flip_horizontal(img, one_point({20, 30}, 0));
    CHECK_FALSE(t.keypoints.visible[0]);
    CHECK(t.keypoints.visible[3]);
    CHECK(t.keypoints.points[3] == Point2{235, 30});
    for (auto [a, b] : {std::pair{0, 3}, {1, 2}, {4, 9}, {5, 8}, {6, 7}, {11, 13}}) {
      CHECK(kMirrorPartner[a] == b);
      CHECK(kMirrorPartner[b] == a);
    }
    CHECK(kMirrorPartner[10] == 10);
    CHECK(kMirrorPartner[12] == 12);
  }
}

TEST_CASE("rotate") {
  const Image img = test::random_image(64, 48, 3, 5);
  const KeypointSet kps = random_points(64, 48, 6);

  SUBCASE("zero degrees leaves coordinates unchanged") {
    const Transformed t = rotate(img, kps, 0.0);
    for (int i = 0; i < kNumKeypoints; ++i) {
      CHECK(std::abs(t.keypoints.points[i].x - kps.points[i].x) <= 1e-9);
      CHECK(std::abs(t.keypoints.points[i].y - kps.points[i].y) <= 1e-9);
    }
  }
  SUBCASE("+40 then -40 restores coordinates") {
    const Transformed a = rotate(img, kps, 40.0);
    const Transformed b = rotate(a.image, a.keypoints, -40.0);
    for (int i = 0; i < kNumKeypoints; ++i) {
      const Point2 r = AffineMap::rotation(-40.0, {31.5, 23.5}).apply(a.keypoints.points[i]);
      CHECK(std::abs(r.x - kps.points[i].x) < 1e-6);
      CHECK(std::abs(r.y - kps.points[i].y) < 1e-6);
      if (b.keypoints.visible[i]) {
        CHECK(std::abs(b.keypoints.points[i].x - kps.points[i].x) < 1e-6);
        CHECK(std::abs(b.keypoints.points[i].y - kps.points[i].y) < 1e-6);
      }
    }
  }
  SUBCASE("the image center is a fixed point") {
    for (double deg : {-180.0, -40.0, 13.0, 90.0, 179.0}) {
      const Transformed t = rotate(img, one_point({31.5, 23.5}), deg);
      CHECK(t.keypoints.points[0].x == doctest::Approx(31.5));
      CHECK(t.keypoints.points[0].y == doctest::Approx(23.5));
      CHECK(t.keypoints.visible[0]);
    }
  }
  SUBCASE("positive angles turn counter-clockwise on screen") {
    // A point right of center moves up (smaller y) under +90.
    const Transformed t = rotate(img, one_point({41.5, 23.5}), 90.0);
    CHECK(t.keypoints.points[0].x == doctest::Approx(31.5));
    CHECK(t.keypoints.points[0].y == doctest::Approx(13.5));
  }
  SUBCASE("corners fill with zeros and visible points stay in bounds") {
    const Image white(64, 64, 1, 1.0f);
    const Transformed t = rotate(white, random_points(64, 64, 7), 45.0);
    CHECK(t.image.at(0, 0, 0) == 0.0f);
    CHECK(t.image.at(32, 32, 0) == doctest::Approx(1.0f));
    check_visible_in_bounds(t);
  }
  SUBCASE("angles beyond a half turn are rejected") {
    CHECK_THROWS_AS(rotate(img, kps, 180.5), ContractError);
  }
}

TEST_CASE("resize") {
  const Image img = test::random_image(248, 248, 3, 8);

  SUBCASE("same size is the identity") {
    const KeypointSet kps = random_points(248, 248, 9);
    const Transformed t = resize(img, kps, {248, 248});
    CHECK(t.image == img);
    CHECK(t.keypoints == kps);
  }
  SUBCASE("coordinates scale by the size ratio") {
    const Transformed t = resize(img, one_point({124, 124}), {256, 256});
    CHECK(std::abs(t.keypoints.points[0].x - 128.0) < 1e-6);
    CHECK(t.image.width == 256);
  }
  SUBCASE("downscale by 4 then upscale by 4 restores coordinates exactly") {
    const Image big = test::random_image(256, 256, 1, 10);
    const KeypointSet kps = random_points(256, 256, 11);
    const Transformed down = resize(big, kps, {64, 64});
    const Transformed up = resize(down.image, down.keypoints, {256, 256});
    for (int i = 0; i < kNumKeypoints; ++i) {
      if (!up.keypoints.visible[i]) continue;
      CHECK(up.keypoints.points[i] == kps.points[i]);
    }
  }
  SUBCASE("constant images stay constant where the source covers them") {
    const Image gray(10, 10, 1, 0.25f);
    const Transformed t = resize(gray, {}, {5, 5});
    for (float v : t.image.data) CHECK(v == doctest::Approx(0.25f));
  }
  SUBCASE("bad sizes are rejected") {
    CHECK_THROWS_AS(resize(img, {}, {0, 10}), ContractError);
  }
}

TEST_CASE("affine maps compose and invert") {
  const AffineMap a = AffineMap::rotation(30.0, {5, 7}).followed_by(AffineMap::scaling(2.0, 0.5));
  const AffineMap b = a.followed_by(AffineMap::translation(3, -4));
  const Point2 p{11.0, -2.5};
  const Point2 q = b.apply(p);
  const Point2 expect = AffineMap::translation(3, -4).apply(
      AffineMap::scaling(2.0, 0.5).apply(AffineMap::rotation(30.0, {5, 7}).apply(p)));
  CHECK(q.x == doctest::Approx(expect.x));
  CHECK(q.y == doctest::Approx(expect.y));
  const Point2 back = b.inverse().apply(q);
  CHECK(back.x == doctest::Approx(p.x));
  CHECK(back.y == doctest::Approx(p.y));
  CHECK(b.determinant() == doctest::Approx(1.0));
  CHECK_THROWS_AS(AffineMap::scaling(0.0, 1.0).inverse(), ContractError);
}

TEST_CASE("PNG files store round(v*255)") {
  const auto dir = test::scratch_dir("png");
  Image img(3, 2, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(i) / 17.0f;
  save_png(img, dir / "a.png");
  const Image back = load_png(dir / "a.png");
  REQUIRE(back.width == 3);
  REQUIRE(back.channels == 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(back.data[i] == doctest::Approx(std::round(img.data[i] * 255.0f) / 255.0f));
  }
  Image gray(4, 4, 1, 0.5f);
  save_png(gray, dir / "g.png");
  CHECK(load_png(dir / "g.png").channels == 1);
  CHECK_THROWS_AS(load_png(dir / "missing.png"), IoError);
}

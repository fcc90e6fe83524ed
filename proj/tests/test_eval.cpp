#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dfi/errors.hpp"
#include "dfi/eval.hpp"
#include "test_util.hpp"

using namespace dfi;

namespace {

class TruthDetector final : public KeypointDetector {
 public:
  explicit TruthDetector(Size2 size, Point2 offset = {0, 0}) : size_(size), offset_(offset) {}
  KeypointSet detect(const Image&, const KeypointSet& truth) const override {
    KeypointSet k = truth;
    for (Point2& p : k.points) p = {p.x + offset_.x, p.y + offset_.y};
    return k;
  }
  Size2 input_size() const override { return size_; }

 private:
  Size2 size_;
  Point2 offset_;
};

class NoBoxes final : public FaceBoxProvider {
 public:
  std::vector<FaceBox> locate(const MultiFaceScene&) const override { return {}; }
};

class BlindDetector final : public KeypointDetector {
 public:
  KeypointSet detect(const Image&, const KeypointSet&) const override { return {}; }
  Size2 input_size() const override { return {128, 128}; }
};

KeypointSet single(Point2 p, int k = 0) {
  KeypointSet s;
  s.points[k] = p;
  s.visible[k] = true;
  return s;
}

std::vector<AnnotatedFace> faces(int n, const std::vector<Disguise>& disguises, int size = 128) {
  GeneratorConfig g;
  g.image_size = size;
  const auto subjects = sample_subjects(g, n, 21);
  std::vector<AnnotatedFace> out;
  for (int i = 0; i < n; ++i) {
    const Disguise d = disguises[static_cast<std::size_t>(i) % disguises.size()];
    const Background bg = i % 2 == 0 ? Background::simple : Background::complex;
    out.push_back(generate_face(subjects[static_cast<std::size_t>(i)], d, bg, 100 + i, g));
  }
  return out;
}

}  // namespace

TEST_CASE("pck counts inclusive Euclidean hits over visible truths") {
  const double ds[] = {4.9, 5.0};
  const KeypointSet det = single({10, 10}), gt = single({13, 14});
  const PckTable t = pck(std::span(&det, 1), std::span(&gt, 1), ds);
  CHECK(t.accuracy(0, 0) == 0.0);
  CHECK(t.accuracy(0, 1) == 100.0);
  CHECK(t.visible[0] == 1);
  CHECK(t.visible[1] == 0);
  // Only P1 has a denominator, so it alone makes up the average.
  CHECK(t.average(1) == 100.0);

  const KeypointSet missing;
  const PckTable m = pck(std::span(&missing, 1), std::span(&gt, 1), ds);
  CHECK(m.accuracy(0, 0) == 0.0);
  CHECK(m.accuracy(0, 1) == 0.0);

  const PckTable same = pck(std::span(&gt, 1), std::span(&gt, 1), ds);
  CHECK(same.average(0) == 100.0);

  std::vector<KeypointSet> two(2);
  CHECK_THROWS_AS(pck(two, std::span(&gt, 1), ds), ContractError);
}

TEST_CASE("pck agrees exactly with a brute-force recount") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 128), jitter(-12, 12);
  std::bernoulli_distribution coin(0.8);
  const std::vector<double> ds{1, 2.5, 5, 10, 15};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial * 49 / 19;  // 1..50 samples
    std::vector<KeypointSet> det(n), gt(n);
    for (std::size_t s = 0; s < n; ++s) {
      for (int k = 0; k < kNumKeypoints; ++k) {
        gt[s].points[k] = {pos(rng), pos(rng)};
        gt[s].visible[k] = coin(rng);
        det[s].points[k] = {gt[s].points[k].x + jitter(rng), gt[s].points[k].y + jitter(rng)};
        det[s].visible[k] = coin(rng);
      }
    }
    const PckTable t = pck(det, gt, ds);
    CHECK(t.samples == n);
    double avg_sum[5] = {};
    int avg_n = 0;
    for (int k = 0; k < kNumKeypoints; ++k) {
      std::size_t vis = 0;
      for (std::size_t s = 0; s < n; ++s) vis += gt[s].visible[k];
      CHECK(t.visible[k] == vis);
      if (vis > 0) ++avg_n;
      for (std::size_t d = 0; d < ds.size(); ++d) {
        std::size_t hit = 0;
        for (std::size_t s = 0; s < n; ++s) {
          if (!gt[s].visible[k] || !det[s].visible[k]) continue;
          const double dx = det[s].points[k].x - gt[s].points[k].x;
          const double dy = det[s].points[k].y - gt[s].points[k].y;
          hit += std::sqrt(dx * dx + dy * dy) <= ds[d];
        }
        CHECK(t.correct[k][d] == hit);
        const double acc = vis == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(vis);
        CHECK(t.accuracy(k, d) == acc);
        if (vis > 0) avg_sum[d] += acc;
      }
    }
    for (std::size_t d = 0; d < ds.size(); ++d) {
      CHECK(std::abs(t.average(d) - avg_sum[d] / avg_n) <= 1e-9);
      if (d > 0) {
        for (int k = 0; k < kNumKeypoints; ++k) CHECK(t.accuracy(k, d) >= t.accuracy(k, d - 1));
      }
    }
  }
}

TEST_CASE("pck config validation") {
  PckConfig c;
  CHECK_NOTHROW(c.validate());
  c.distances = {5, 5};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.distances = {0, 5};
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("evaluate_detector with oracle detectors") {
  const auto fs = faces(8, {Disguise::none, Disguise::cap, Disguise::scarf, Disguise::cap});
  const AugmentConfig pre = AugmentConfig::desk();
  PckConfig cfg;
  cfg.distances = {4, 4.9, 5, 10};

  SUBCASE("ground truth scores 100 everywhere") {
    const DetectionReport r = evaluate_detector(TruthDetector({128, 128}), fs, pre, cfg);
    for (std::size_t d = 0; d < 4; ++d) CHECK(r.overall.average(d) == 100.0);
    CHECK(r.overall.samples == 8);
    CHECK(r.by_background.size() == 2);
    CHECK(r.by_background.at("simple").samples == 4);
  }
  SUBCASE("a (3,4) offset is exactly 5 px off") {
    const DetectionReport r = evaluate_detector(TruthDetector({128, 128}, {3, 4}), fs, pre, cfg);
    CHECK(r.overall.average(0) == 0.0);
    CHECK(r.overall.average(1) == 0.0);
    CHECK(r.overall.average(2) == 100.0);
    CHECK(r.overall.average(3) == 100.0);
  }
  SUBCASE("slices exist only for disguises that occur") {
    const DetectionReport r = evaluate_detector(TruthDetector({128, 128}), fs, pre, cfg);
    CHECK(r.by_disguise.size() == 3);
    CHECK(r.by_disguise.count("sunglasses") == 0);
    CHECK(r.by_disguise.at("cap").samples == 4);
  }
  SUBCASE("a blind detector scores 0") {
    const DetectionReport r = evaluate_detector(BlindDetector(), fs, pre, cfg);
    CHECK(r.overall.average(3) == 0.0);
  }
  SUBCASE("curves use the dense distance list, keyed by background") {
    const DetectionReport r = evaluate_detector(TruthDetector({128, 128}, {3, 4}), fs, pre, cfg);
    REQUIRE(r.curves.count("simple") == 1);
    const PckTable& c = r.curves.at("simple");
    CHECK(c.distances == cfg.curve_distances);
    CHECK(c.accuracy(0, 4) == 0.0);
    CHECK(c.accuracy(0, 5) == 100.0);
  }
}

TEST_CASE("observe maps detections back to source coordinates") {
  const auto fs = faces(3, {Disguise::none}, 256);
  const auto obs = observe(fs, nullptr, AugmentConfig{});
  REQUIRE(obs.size() == 3);
  CHECK(obs[1].keypoints == fs[1].keypoints);
  const TruthDetector truth({256, 256});
  const auto det = observe(fs, &truth, AugmentConfig{});
  for (int k = 0; k < kNumKeypoints; ++k) {
    CHECK(det[2].keypoints.points[k].x == doctest::Approx(fs[2].keypoints.points[k].x));
    CHECK(det[2].keypoints.points[k].y == doctest::Approx(fs[2].keypoints.points[k].y));
  }
}

TEST_CASE("identification with ground-truth keypoints is perfect") {
  GeneratorConfig g;
  const auto subjects = sample_subjects(g, 25, 2);
  std::vector<FaceObservation> refs, probes;
  for (const FaceParams& p : subjects) {
    refs.push_back({p.subject_id, Disguise::none, generate_face(p, Disguise::none, Background::simple, 1, g).keypoints});
    for (Disguise d : kAllDisguises) {
      probes.push_back({p.subject_id, d, generate_face(p, d, Background::complex, 50 + p.subject_id, g).keypoints});
    }
  }
  IdentificationConfig cfg;
  const IdentificationReport r = evaluate_identification(refs, probes, cfg);
  CHECK(r.overall.probes == 250);
  CHECK(r.overall.correct == 250);
  CHECK(r.by_disguise.size() == 10);
  for (const ProbeResult& p : r.probes) {
    CHECK(p.gallery.size() == 5);
    CHECK(std::find(p.gallery.begin(), p.gallery.end(), p.subject_id) != p.gallery.end());
  }
  CHECK(evaluate_identification(refs, probes, cfg) == r);

  cfg.gallery_size = 1;
  CHECK(evaluate_identification(refs, probes, cfg).overall.percent() == 100.0);
  cfg.gallery_size = 26;
  CHECK_THROWS_AS(evaluate_identification(refs, probes, cfg), ContractError);
}

TEST_CASE("random-angle probes identify at chance") {
  GeneratorConfig g;
  const auto subjects = sample_subjects(g, 25, 3);
  std::vector<FaceObservation> refs;
  for (const FaceParams& p : subjects) refs.push_back({p.subject_id, Disguise::none, face_keypoints(p, {128, 128})});
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::vector<FaceObservation> probes;
  for (int t = 0; t < 10000; ++t) {
    KeypointSet k;
    k.visible.fill(true);
    k.points[kNoseIndex] = {128, 128};
    for (int i = 0; i < kNumKeypoints; ++i) {
      if (i == kNoseIndex) continue;
      const double a = ang(rng);
      k.points[i] = {128 + 40 * std::cos(a), 128 + 40 * std::sin(a)};
    }
    probes.push_back({t % 25, Disguise::cap, k});
  }
  const double acc = evaluate_identification(refs, probes, IdentificationConfig{}).overall.percent();
  CHECK(acc >= 16.0);
  CHECK(acc <= 24.0);
}

TEST_CASE("probes without a usable star-net count as misses") {
  GeneratorConfig g;
  const auto subjects = sample_subjects(g, 5, 4);
  std::vector<FaceObservation> refs;
  for (const FaceParams& p : subjects) refs.push_back({p.subject_id, Disguise::none, face_keypoints(p, {128, 128})});
  FaceObservation blind{2, Disguise::scarf, {}};
  FaceObservation sparse{3, Disguise::scarf, face_keypoints(subjects[3], {128, 128})};
  for (int i = 0; i < 9; ++i) sparse.keypoints.visible[i] = false;
  const std::vector<FaceObservation> probes{blind, sparse};
  const IdentificationReport r = evaluate_identification(refs, probes, IdentificationConfig{});
  CHECK(r.overall.probes == 2);
  CHECK(r.overall.correct == 0);
  CHECK(r.probes[0].predicted == -1);
  CHECK(r.probes[0].excluded.size() == 5);
  CHECK(r.probes[1].excluded.size() == 5);
}

TEST_CASE("gallery sampling is seeded per probe and always includes the subject") {
  const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto a = sample_gallery(ids, 4, 5, 7, 3);
  CHECK(a == sample_gallery(ids, 4, 5, 7, 3));
  CHECK(a.size() == 5);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(std::find(a.begin(), a.end(), 4) != a.end());
  bool differs = false;
  for (std::size_t p = 0; p < 20; ++p) differs |= sample_gallery(ids, 4, 5, 7, p) != a;
  CHECK(differs);
}

TEST_CASE("multi-face back-mapping and oracle scoring") {
  SUBCASE("crop at (80,60) with ×2 resize") {
    const AffineMap m = box_to_input({80, 60, 64, 64}, {128, 128});
    const Point2 input{10 * 4.0, 10 * 4.0};  // heatmap cell (10,10) at stride 4
    const Point2 scene = m.inverse().apply(input);
    CHECK(scene.x == doctest::Approx(100.0));
    CHECK(scene.y == doctest::Approx(80.0));
  }
  SUBCASE("one face with the whole-image box matches single-face evaluation") {
    GeneratorConfig g;
    g.image_size = 128;
    const auto subjects = sample_subjects(g, 1, 8);
    const MultiFaceScene scene = generate_scene(subjects, Background::simple, 5, g);
    const PckConfig cfg;
    const MultiFaceReport r =
        evaluate_multiface(TruthDetector({128, 128}, {3, 4}), std::span(&scene, 1), OracleBoxProvider(), cfg);
    CHECK(r.by_face_count.at(1).average(0) == 100.0);
    CHECK(r.by_face_count.at(1).samples == 1);
  }
  SUBCASE("2- and 3-face scenes with oracle boxes and ground truth score 100") {
    GeneratorConfig g;
    g.image_size = 96;
    const auto subjects = sample_subjects(g, 3, 9);
    std::vector<MultiFaceScene> scenes;
    for (int s = 0; s < 4; ++s) {
      scenes.push_back(generate_scene({subjects[0], subjects[1]}, Background::complex, 10 + s, g));
      scenes.push_back(generate_scene(subjects, Background::simple, 20 + s, g));
    }
    const MultiFaceReport r = evaluate_multiface(TruthDetector({128, 128}), scenes, OracleBoxProvider(), PckConfig{});
    REQUIRE(r.by_face_count.size() == 2);
    CHECK(r.by_face_count.at(2).samples == 8);
    CHECK(r.by_face_count.at(3).samples == 12);
    for (const auto& [n, t] : r.by_face_count)
      for (std::size_t d = 0; d < 3; ++d) CHECK(t.average(d) == 100.0);
    CHECK(r.skipped_scenes == 0);
    const MultiFaceReport none = evaluate_multiface(TruthDetector({128, 128}), scenes, NoBoxes(), PckConfig{});
    CHECK(none.skipped_scenes == 8);
    CHECK(none.by_face_count.empty());
  }
}

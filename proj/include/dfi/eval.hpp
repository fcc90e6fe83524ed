#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dfi/augment.hpp"
#include "dfi/heatmap.hpp"
#include "dfi/manifest.hpp"
#include "dfi/nn/network.hpp"
#include "dfi/starnet.hpp"
#include "dfi/synth.hpp"

namespace dfi {

struct PckConfig {
  std::vector<double> distances{5.0, 10.0, 15.0};
  /// Dense sweep for accuracy-vs-distance curves.
  std::vector<double> curve_distances{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};

  /// Throws ContractError unless distances are positive and strictly increasing.
  void validate() const;
};

/// Percentage of visible ground-truth points detected within d pixels (inclusive).
struct PckTable {
  std::vector<double> distances;
  std::array<std::vector<std::size_t>, kNumKeypoints> correct{};
  std::array<std::size_t, kNumKeypoints> visible{};  // denominator per point
  std::size_t samples = 0;

  /// 100·correct/visible; 0 for a point that was never visible.
  double accuracy(int point, std::size_t d) const;
  /// Mean over points with a nonzero denominator.
  double average(std::size_t d) const;

  friend bool operator==(const PckTable&, const PckTable&) = default;
};

/// Throws ContractError when the lists differ in length.
PckTable pck(std::span<const KeypointSet> detections, std::span<const KeypointSet> truths,
             std::span<const double> distances);

/// Anything mapping a network-input image to keypoints in the same frame.
/// `truth` is supplied so test oracles can be plugged in; learned detectors
/// ignore it.
class KeypointDetector {
 public:
  virtual ~KeypointDetector() = default;
  virtual KeypointSet detect(const Image& input, const KeypointSet& truth) const = 0;
  virtual Size2 input_size() const = 0;
};

class RegressorDetector final : public KeypointDetector {
 public:
  RegressorDetector(nn::Regressor net, GaussianSpec spec, DecodeOptions decode = {});
  KeypointSet detect(const Image& input, const KeypointSet& truth) const override;
  Size2 input_size() const override;
  HeatmapStack heatmaps(const Image& input) const;

 private:
  mutable nn::Regressor net_;
  GaussianSpec spec_;
  DecodeOptions decode_;
};

struct DetectionReport {
  PckTable overall;
  std::map<std::string, PckTable> by_background;
  std::map<std::string, PckTable> by_disguise;
  /// Dense accuracy-vs-distance tables, keyed by background.
  std::map<std::string, PckTable> curves;

  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

/// Center-crop + resize preprocessing, detection, PCK in network-input pixels.
DetectionReport evaluate_detector(const KeypointDetector& detector,
                                  std::span<const AnnotatedFace> faces,
                                  const AugmentConfig& preprocess, const PckConfig& cfg);

struct Accuracy {
  std::size_t probes = 0;
  std::size_t correct = 0;

  double percent() const { return probes == 0 ? 0.0 : 100.0 * correct / probes; }
  friend bool operator==(const Accuracy&, const Accuracy&) = default;
};

struct IdentificationConfig {
  int gallery_size = 5;
  std::uint64_t seed = 0;
  bool wrap = true;
  int min_common = kDefaultMinCommon;
};

/// Keypoints of one face in source-image coordinates.
struct FaceObservation {
  int subject_id = 0;
  Disguise disguise = Disguise::none;
  KeypointSet keypoints;
};

struct ProbeResult {
  int subject_id = 0;
  Disguise disguise = Disguise::none;
  int predicted = -1;  // -1 when no gallery entry could be compared
  bool correct = false;
  StarNet starnet;
  std::vector<int> gallery;   // subject ids compared against
  std::vector<double> taus;   // aligned with `gallery`
  std::vector<int> excluded;  // sampled ids that could not be compared

  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

struct IdentificationReport {
  Accuracy overall;
  std::map<std::string, Accuracy> by_disguise;
  std::vector<ProbeResult> probes;

  friend bool operator==(const IdentificationReport&, const IdentificationReport&) = default;
};

/// The probe's own subject plus `size-1` distinct others drawn with a
/// generator seeded by (seed, probe_index); returned in ascending id order.
std::vector<int> sample_gallery(std::span<const int> subjects, int own, int size,
                                std::uint64_t seed, std::size_t probe_index);

/// Rank-1 identification of every probe against a sampled gallery of
/// references. A probe whose star-net cannot be built, or that cannot be
/// compared with its own reference, counts as a miss.
IdentificationReport evaluate_identification(std::span<const FaceObservation> references,
                                             std::span<const FaceObservation> probes,
                                             const IdentificationConfig& cfg);

/// Runs `detector` (or copies ground truth when null) over faces and returns
/// keypoints mapped back to source-image coordinates.
std::vector<FaceObservation> observe(std::span<const AnnotatedFace> faces,
                                     const KeypointDetector* detector,
                                     const AugmentConfig& preprocess);

/// Supplies face boxes for a multi-face scene. Learned detectors would read
/// only `scene.image`; the oracle reads the generator's metadata.
class FaceBoxProvider {
 public:
  virtual ~FaceBoxProvider() = default;
  virtual std::vector<FaceBox> locate(const MultiFaceScene& scene) const = 0;
};

class OracleBoxProvider final : public FaceBoxProvider {
 public:
  std::vector<FaceBox> locate(const MultiFaceScene& scene) const override;
};

/// Source box → network input: translate by −origin, then scale to `input`.
AffineMap box_to_input(const FaceBox& box, Size2 input);

struct MultiFaceReport {
  std::map<int, PckTable> by_face_count;  // PCK in scene pixels
  std::size_t skipped_scenes = 0;

  friend bool operator==(const MultiFaceReport&, const MultiFaceReport&) = default;
};

MultiFaceReport evaluate_multiface(const KeypointDetector& detector,
                                   std::span<const MultiFaceScene> scenes,
                                   const FaceBoxProvider& provider, const PckConfig& cfg);

struct EvalReport {
  std::vector<double> distances;
  std::optional<DetectionReport> detection;
  std::optional<IdentificationReport> identification;
  std::optional<MultiFaceReport> multiface;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

}  // namespace dfi

#pragma once

#include <cstdint>

#include "dfi/geometry.hpp"
#include "dfi/synth.hpp"

namespace dfi {

struct AugmentConfig {
  Size2 crop{248, 248};
  double rotation_range = 40.0;  // degrees, symmetric
  double flip_prob = 0.5;
  Size2 output{256, 256};
  bool enabled = true;

  void validate() const;
  static AugmentConfig desk() { return {{124, 124}, 40.0, 0.5, {128, 128}, true}; }
};

/// The random choices behind one augmented sample.
struct AugmentDraw {
  Size2 origin;
  bool flip = false;
  double degrees = 0.0;
};

/// Samples crop origin, flip and rotation for a source of size `source`.
/// Crop origins keeping every visible keypoint inside the crop are preferred;
/// when none exists the origin is uniform over all valid positions.
AugmentDraw draw_augmentation(const AugmentConfig& cfg, Size2 source, const KeypointSet& kps,
                              std::uint64_t seed);

/// crop → flip (with label swap) → rotate → resize.
AnnotatedFace apply_augmentation(const AnnotatedFace& face, const AugmentConfig& cfg,
                                 const AugmentDraw& draw);

/// Draws and applies an augmentation; returns `face` unchanged when disabled.
AnnotatedFace augment_sample(const AnnotatedFace& face, const AugmentConfig& cfg,
                             std::uint64_t seed);

struct Preprocessed {
  AnnotatedFace face;
  AffineMap to_input;  // source pixel coordinates → network input coordinates
};

/// Deterministic evaluation transform: center crop (clamped to the image) then
/// resize to cfg.output.
Preprocessed preprocess_eval(const AnnotatedFace& face, const AugmentConfig& cfg);

}  // namespace dfi

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dfi/image.hpp"

namespace dfi {

inline constexpr int kNumAngles = kNumKeypoints - 1;

/// Keypoint index behind star-net angle slot `slot` (P1..P10, P12..P14).
constexpr int angle_keypoint(int slot) { return slot < kNoseIndex ? slot : slot + 1; }

/// Orientations of every keypoint as seen from the nose.
struct StarNet {
  std::array<double, kNumAngles> angles{};  // radians in (-π, π]; 0 where invalid
  std::array<bool, kNumAngles> valid{};

  int valid_count() const;
  friend bool operator==(const StarNet&, const StarNet&) = default;
};

/// Throws ContractError when the nose is not visible. A point coincident with
/// the nose has no orientation and is left invalid.
StarNet build_starnet(const KeypointSet& kps);

/// Wrapped absolute difference min(|a-b|, 2π-|a-b|) of two angles in (-π, π].
double wrapped_delta(double a, double b);

struct Similarity {
  double tau = 0.0;
  int common = 0;  // indices valid in both nets
};

inline constexpr int kDefaultMinCommon = 6;

/// L1 distance between two star-nets over their commonly valid angles.
/// Raw sum: no normalization by the common count. Throws ContractError when
/// fewer than `min_common` angles are valid in both.
Similarity similarity(const StarNet& a, const StarNet& b, bool wrap = true,
                      int min_common = kDefaultMinCommon);

struct GalleryEntry {
  int subject_id = 0;
  StarNet starnet;
};

struct Identification {
  int subject_id = 0;
  std::vector<Similarity> scores;  // aligned with the gallery
};

/// Rank-1 identification: smallest τ wins, ties go to the lowest subject id.
Identification identify(const StarNet& probe, const std::vector<GalleryEntry>& gallery,
                        bool wrap = true, int min_common = kDefaultMinCommon);

}  // namespace dfi

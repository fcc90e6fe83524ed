#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace dfi {

/// Interleaved row-major image with intensities in [0,1].
/// Pixel (x, y) has its center at continuous coordinate (x, y).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }

  friend bool operator==(const Image&, const Image&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline constexpr int kNumKeypoints = 14;

/// Index of the nose point (P11).
inline constexpr int kNoseIndex = 10;

/// Display name of keypoint `i` (0-based): "P1".."P14".
std::string_view keypoint_name(int i);

/// The 14 facial points, index i ↔ P(i+1):
///  P1..P4 eyebrow outer/inner corners (image-left brow first),
///  P5..P10 eye outer corner, center, inner corner for each eye,
///  P11 nose tip, P12..P14 lip left corner, centre, right corner.
struct KeypointSet {
  std::array<Point2, kNumKeypoints> points{};
  std::array<bool, kNumKeypoints> visible{};

  friend bool operator==(const KeypointSet&, const KeypointSet&) = default;
};

/// Left/right partner of each keypoint under a horizontal mirror.
inline constexpr std::array<int, kNumKeypoints> kMirrorPartner = {3, 2, 1, 0, 9, 8, 7,
                                                                  6, 5, 4, 10, 13, 12, 11};

/// True when (x, y) lies within the pixel-center hull [0, w-1] × [0, h-1].
inline bool in_bounds(const Point2& p, int width, int height) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1;
}

/// 2×3 map from source to destination coordinates:
/// x' = a·x + b·y + tx,  y' = c·x + d·y + ty.
struct AffineMap {
  double a = 1, b = 0, tx = 0;
  double c = 0, d = 1, ty = 0;

  static AffineMap translation(double dx, double dy);
  static AffineMap scaling(double sx, double sy);
  /// Rotation by `degrees` about `center`; positive angles turn counter-clockwise
  /// as displayed (y axis pointing down).
  static AffineMap rotation(double degrees, Point2 center);

  Point2 apply(Point2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
  double determinant() const { return a * d - b * c; }
  AffineMap inverse() const;
  /// `then ∘ *this`: apply *this first, then `then`.
  AffineMap followed_by(const AffineMap& then) const;
};

}  // namespace dfi

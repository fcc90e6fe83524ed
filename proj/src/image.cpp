#include "dfi/image.hpp"

#include <cmath>
#include <numbers>

#include "dfi/errors.hpp"

namespace dfi {

Image::Image(int w, int h, int c, float fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c),
           fill) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) {
    throw ContractError("image: invalid dimensions");
  }
}

std::string_view keypoint_name(int i) {
  static constexpr std::string_view kNames[kNumKeypoints] = {
      "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9", "P10", "P11", "P12", "P13", "P14"};
  return kNames[i];
}

AffineMap AffineMap::translation(double dx, double dy) { return {1, 0, dx, 0, 1, dy}; }

AffineMap AffineMap::scaling(double sx, double sy) { return {sx, 0, 0, 0, sy, 0}; }

AffineMap AffineMap::rotation(double degrees, Point2 center) {
  const double r = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(r);
  const double sn = std::sin(r);
  // Counter-clockwise on screen with y pointing down.
  AffineMap m{cs, sn, 0, -sn, cs, 0};
  m.tx = center.x - (m.a * center.x + m.b * center.y);
  m.ty = center.y - (m.c * center.x + m.d * center.y);
  return m;
}

AffineMap AffineMap::inverse() const {
  const double det = determinant();
  if (det == 0.0) throw ContractError("affine map is singular");
  AffineMap inv{d / det, -b / det, 0, -c / det, a / det, 0};
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  return inv;
}

AffineMap AffineMap::followed_by(const AffineMap& t) const {
  return {t.a * a + t.b * c, t.a * b + t.b * d, t.a * tx + t.b * ty + t.tx,
          t.c * a + t.d * c, t.c * b + t.d * d, t.c * tx + t.d * ty + t.ty};
}

}  // namespace dfi

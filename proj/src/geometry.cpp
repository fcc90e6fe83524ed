#include "dfi/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "dfi/errors.hpp"

namespace dfi {

namespace {

void sample_bilinear(const Image& img, double x, double y, float* out) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const float fx = static_cast<float>(x - x0);
  const float fy = static_cast<float>(y - y0);
  const float w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  for (int c = 0; c < img.channels; ++c) out[c] = 0.0f;
  for (int t = 0; t < 4; ++t) {
    if (w[t] == 0.0f) continue;
    if (xs[t] < 0 || ys[t] < 0 || xs[t] >= img.width || ys[t] >= img.height) continue;
    for (int c = 0; c < img.channels; ++c) out[c] += w[t] * img.at(xs[t], ys[t], c);
  }
}

}  // namespace

KeypointSet transform_keypoints(const KeypointSet& kps, const AffineMap& map, Size2 frame) {
  KeypointSet out;
  for (int i = 0; i < kNumKeypoints; ++i) {
    out.points[i] = map.apply(kps.points[i]);
    out.visible[i] = kps.visible[i] && in_bounds(out.points[i], frame.width, frame.height);
  }
  return out;
}

Image warp_affine(const Image& img, const AffineMap& map, Size2 out_size) {
  const AffineMap inv = map.inverse();
  Image out(out_size.width, out_size.height, img.channels);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_size.height; ++y) {
    for (int x = 0; x < out_size.width; ++x) {
      const Point2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      sample_bilinear(img, src.x, src.y, &out.at(x, y, 0));
    }
  }
  for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

Transformed crop(const Image& img, const KeypointSet& kps, Size2 origin, Size2 size) {
  if (origin.width < 0 || origin.height < 0 || size.width < 1 || size.height < 1 ||
      origin.width + size.width > img.width || origin.height + size.height > img.height) {
    throw ContractError("crop: rectangle exceeds image bounds");
  }
  Transformed out{Image(size.width, size.height, img.channels), {}};
  const std::size_t row = static_cast<std::size_t>(size.width) * img.channels;
  for (int y = 0; y < size.height; ++y) {
    const float* src = img.data.data() + (static_cast<std::size_t>(origin.height + y) * img.width + origin.width) * img.channels;
    std::copy(src, src + row, &out.image.at(0, y, 0));
  }
  out.keypoints = transform_keypoints(
      kps, AffineMap::translation(-origin.width, -origin.height), size);
  return out;
}

Transformed flip_horizontal(const Image& img, const KeypointSet& kps) {
  Transformed out{Image(img.width, img.height, img.channels), {}};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        out.image.at(img.width - 1 - x, y, c) = img.at(x, y, c);
      }
    }
  }
  for (int i = 0; i < kNumKeypoints; ++i) {
    const int j = kMirrorPartner[i];
    out.keypoints.points[j] = {(img.width - 1) - kps.points[i].x, kps.points[i].y};
    out.keypoints.visible[j] = kps.visible[i];
  }
  return out;
}

Transformed rotate(const Image& img, const KeypointSet& kps, double degrees) {
  if (std::abs(degrees) > 180.0) throw ContractError("rotate: |degrees| must be <= 180");
  const Point2 center{(img.width - 1) / 2.0, (img.height - 1) / 2.0};
  const AffineMap map = AffineMap::rotation(degrees, center);
  const Size2 frame{img.width, img.height};
  return {warp_affine(img, map, frame), transform_keypoints(kps, map, frame)};
}

Transformed resize(const Image& img, const KeypointSet& kps, Size2 new_size) {
  if (new_size.width < 1 || new_size.height < 1) {
    throw ContractError("resize: dimensions must be >= 1");
  }
  if (new_size.width == img.width && new_size.height == img.height) return {img, kps};
  const AffineMap map = AffineMap::scaling(static_cast<double>(new_size.width) / img.width,
                                           static_cast<double>(new_size.height) / img.height);
  return {warp_affine(img, map, new_size), transform_keypoints(kps, map, new_size)};
}

}  // namespace dfi

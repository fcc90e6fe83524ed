#include "dfi/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dfi/errors.hpp"

namespace dfi {

void AugmentConfig::validate() const {
  if (crop.width < 1 || crop.height < 1 || output.width < 1 || output.height < 1) {
    throw ContractError("augment config: sizes must be positive");
  }
  if (rotation_range < 0.0 || rotation_range > 180.0) {
    throw ContractError("augment config: rotation range must lie in [0, 180]");
  }
  if (flip_prob < 0.0 || flip_prob > 1.0) {
    throw ContractError("augment config: flip probability must lie in [0, 1]");
  }
}

AugmentDraw draw_augmentation(const AugmentConfig& cfg, Size2 source, const KeypointSet& kps,
                              std::uint64_t seed) {
  cfg.validate();
  if (source.width < cfg.crop.width || source.height < cfg.crop.height) {
    throw ContractError("augment: image is smaller than the crop");
  }
  std::mt19937_64 rng(seed);
  const int max_x = source.width - cfg.crop.width;
  const int max_y = source.height - cfg.crop.height;

  // Origins keeping point p inside satisfy p - (crop-1) <= origin <= p.
  int lo_x = 0, hi_x = max_x, lo_y = 0, hi_y = max_y;
  for (int i = 0; i < kNumKeypoints; ++i) {
    if (!kps.visible[i]) continue;
    const Point2 p = kps.points[i];
    lo_x = std::max(lo_x, static_cast<int>(std::ceil(p.x - (cfg.crop.width - 1))));
    hi_x = std::min(hi_x, static_cast<int>(std::floor(p.x)));
    lo_y = std::max(lo_y, static_cast<int>(std::ceil(p.y - (cfg.crop.height - 1))));
    hi_y = std::min(hi_y, static_cast<int>(std::floor(p.y)));
  }
  if (lo_x > hi_x || lo_y > hi_y) {
    lo_x = 0, hi_x = max_x, lo_y = 0, hi_y = max_y;
  }

  AugmentDraw d;
  d.origin.width = std::uniform_int_distribution<int>(lo_x, hi_x)(rng);
  d.origin.height = std::uniform_int_distribution<int>(lo_y, hi_y)(rng);
  d.flip = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.flip_prob;
  d.degrees = std::uniform_real_distribution<double>(-cfg.rotation_range, cfg.rotation_range)(rng);
  return d;
}

AnnotatedFace apply_augmentation(const AnnotatedFace& face, const AugmentConfig& cfg,
                                 const AugmentDraw& draw) {
  AnnotatedFace out = face;
  Transformed t = crop(face.image, face.keypoints, draw.origin, cfg.crop);
  if (draw.flip) {
    t = flip_horizontal(t.image, t.keypoints);
    for (int i = 0; i < kNumKeypoints; ++i) out.occluded[kMirrorPartner[i]] = face.occluded[i];
  }
  t = rotate(t.image, t.keypoints, draw.degrees);
  t = resize(t.image, t.keypoints, cfg.output);
  out.image = std::move(t.image);
  out.keypoints = t.keypoints;
  return out;
}

AnnotatedFace augment_sample(const AnnotatedFace& face, const AugmentConfig& cfg,
                             std::uint64_t seed) {
  if (!cfg.enabled) return face;
  const AugmentDraw d = draw_augmentation(
      cfg, {face.image.width, face.image.height}, face.keypoints, seed);
  return apply_augmentation(face, cfg, d);
}

Preprocessed preprocess_eval(const AnnotatedFace& face, const AugmentConfig& cfg) {
  cfg.validate();
  const Size2 size{std::min(cfg.crop.width, face.image.width),
                   std::min(cfg.crop.height, face.image.height)};
  const Size2 origin{(face.image.width - size.width) / 2, (face.image.height - size.height) / 2};
  Transformed t = crop(face.image, face.keypoints, origin, size);
  t = resize(t.image, t.keypoints, cfg.output);
  Preprocessed out{face, AffineMap::translation(-origin.width, -origin.height).followed_by(
                             AffineMap::scaling(static_cast<double>(cfg.output.width) / size.width,
                                                static_cast<double>(cfg.output.height) / size.height))};
  out.face.image = std::move(t.image);
  out.face.keypoints = t.keypoints;
  return out;
}

}  // namespace dfi

#pragma once

#include "dfi/image.hpp"

namespace dfi {

struct Transformed {
  Image image;
  KeypointSet keypoints;
};

struct Size2 {
  int width = 0;
  int height = 0;
};

/// Copies the w×h rectangle at `origin`. Throws ContractError when it leaves the image.
Transformed crop(const Image& img, const KeypointSet& kps, Size2 origin, Size2 size);

/// Mirrors about the vertical axis and swaps left/right keypoint labels.
Transformed flip_horizontal(const Image& img, const KeypointSet& kps);

/// Rotation about the image center; zero fill outside the source.
Transformed rotate(const Image& img, const KeypointSet& kps, double degrees);

/// Bilinear resize; x' = x·(w'/w), y' = y·(h'/h).
Transformed resize(const Image& img, const KeypointSet& kps, Size2 new_size);

/// Bilinear resampling of `img` through `map` (source → destination) into a
/// w×h destination. Samples falling outside the source read as 0.
Image warp_affine(const Image& img, const AffineMap& map, Size2 out_size);

/// Maps every point through `map`; points leaving the w×h frame become not-visible.
KeypointSet transform_keypoints(const KeypointSet& kps, const AffineMap& map, Size2 frame);

}  // namespace dfi

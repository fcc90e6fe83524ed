#include "dfi/starnet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dfi/errors.hpp"

namespace dfi {

int StarNet::valid_count() const {
  int n = 0;
  for (bool v : valid) n += v ? 1 : 0;
  return n;
}

StarNet build_starnet(const KeypointSet& kps) {
  if (!kps.visible[kNoseIndex]) throw ContractError("star-net: nose point is not visible");
  const Point2 nose = kps.points[kNoseIndex];
  StarNet net;
  for (int s = 0; s < kNumAngles; ++s) {
    const int k = angle_keypoint(s);
    const double dx = kps.points[k].x - nose.x;
    const double dy = kps.points[k].y - nose.y;
    if (!kps.visible[k] || (dx == 0.0 && dy == 0.0)) continue;
    double theta = std::atan2(dy, dx);
    if (theta == -std::numbers::pi) theta = std::numbers::pi;
    net.angles[s] = theta;
    net.valid[s] = true;
  }
  return net;
}

double wrapped_delta(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

Similarity similarity(const StarNet& a, const StarNet& b, bool wrap, int min_common) {
  Similarity out;
  for (int s = 0; s < kNumAngles; ++s) {
    if (!a.valid[s] || !b.valid[s]) continue;
    out.tau += wrap ? wrapped_delta(a.angles[s], b.angles[s]) : std::abs(a.angles[s] - b.angles[s]);
    ++out.common;
  }
  if (out.common < min_common) {
    throw ContractError("similarity: only " + std::to_string(out.common) +
                        " commonly valid angles, need " + std::to_string(min_common));
  }
  return out;
}

Identification identify(const StarNet& probe, const std::vector<GalleryEntry>& gallery, bool wrap,
                        int min_common) {
  if (gallery.empty()) throw ContractError("identify: empty gallery");
  Identification out;
  out.scores.reserve(gallery.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    out.scores.push_back(similarity(probe, gallery[i].starnet, wrap, min_common));
    const double t = out.scores[i].tau;
    const double bt = out.scores[best].tau;
    if (t < bt || (t == bt && gallery[i].subject_id < gallery[best].subject_id)) best = i;
  }
  out.subject_id = gallery[best].subject_id;
  return out;
}

}  // namespace dfi

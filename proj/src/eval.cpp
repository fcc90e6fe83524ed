#include "dfi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dfi/errors.hpp"
#include "dfi/seed.hpp"

namespace dfi {

void PckConfig::validate() const {
  auto check = [](const std::vector<double>& d, bool allow_zero, const char* name) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(allow_zero ? d[i] >= 0.0 : d[i] > 0.0) || (i > 0 && d[i] <= d[i - 1])) {
        throw ContractError(std::string("pck config: ") + name +
                            " must be positive and strictly increasing");
      }
    }
  };
  check(distances, false, "distances");
  check(curve_distances, true, "curve distances");
}

double PckTable::accuracy(int point, std::size_t d) const {
  const std::size_t n = visible[static_cast<std::size_t>(point)];
  if (n == 0) return 0.0;
  return 100.0 * static_cast<double>(correct[static_cast<std::size_t>(point)][d]) /
         static_cast<double>(n);
}

double PckTable::average(std::size_t d) const {
  double sum = 0.0;
  int rows = 0;
  for (int p = 0; p < kNumKeypoints; ++p) {
    if (visible[static_cast<std::size_t>(p)] == 0) continue;
    sum += accuracy(p, d);
    ++rows;
  }
  return rows == 0 ? 0.0 : sum / rows;
}

PckTable pck(std::span<const KeypointSet> detections, std::span<const KeypointSet> truths,
             std::span<const double> distances) {
  if (detections.size() != truths.size()) {
    throw ContractError("pck: " + std::to_string(detections.size()) + " detections for " +
                        std::to_string(truths.size()) + " ground truths");
  }
  PckTable t;
  t.distances.assign(distances.begin(), distances.end());
  t.samples = truths.size();
  for (auto& c : t.correct) c.assign(distances.size(), 0);
  for (std::size_t s = 0; s < truths.size(); ++s) {
    for (int p = 0; p < kNumKeypoints; ++p) {
      if (!truths[s].visible[p]) continue;
      ++t.visible[p];
      if (!detections[s].visible[p]) continue;
      const double dist = std::hypot(detections[s].points[p].x - truths[s].points[p].x,
                                     detections[s].points[p].y - truths[s].points[p].y);
      for (std::size_t d = 0; d < distances.size(); ++d) {
        if (dist <= distances[d]) ++t.correct[p][d];
      }
    }
  }
  return t;
}

RegressorDetector::RegressorDetector(nn::Regressor net, GaussianSpec spec, DecodeOptions decode)
    : net_(std::move(net)), spec_(spec), decode_(decode) {
  const nn::Shape3 in = net_.input_shape();
  const nn::Shape3 out = net_.output_shape();
  if (in.width != spec_.input_width || in.height != spec_.input_height ||
      out.width != spec_.stack_width || out.height != spec_.stack_height ||
      out.channels != kNumKeypoints) {
    throw ContractError("regressor detector: network shape does not match the heatmap spec");
  }
}

HeatmapStack RegressorDetector::heatmaps(const Image& input) const {
  return nn::predict_heatmaps(net_, input);
}

KeypointSet RegressorDetector::detect(const Image& input, const KeypointSet&) const {
  return decode(heatmaps(input), spec_, decode_);
}

Size2 RegressorDetector::input_size() const {
  return {net_.input_shape().width, net_.input_shape().height};
}

DetectionReport evaluate_detector(const KeypointDetector& detector,
                                  std::span<const AnnotatedFace> faces,
                                  const AugmentConfig& preprocess, const PckConfig& cfg) {
  cfg.validate();
  std::vector<KeypointSet> det;
  std::vector<KeypointSet> gt;
  det.reserve(faces.size());
  gt.reserve(faces.size());
  for (const AnnotatedFace& f : faces) {
    const Preprocessed p = preprocess_eval(f, preprocess);
    gt.push_back(p.face.keypoints);
    det.push_back(detector.detect(p.face.image, p.face.keypoints));
  }

  DetectionReport r;
  r.overall = pck(det, gt, cfg.distances);
  std::map<std::string, std::vector<std::size_t>> by_bg, by_dis;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    by_bg[std::string(to_string(faces[i].background))].push_back(i);
    by_dis[std::string(to_string(faces[i].disguise))].push_back(i);
  }
  auto slice = [&](const std::vector<std::size_t>& idx, const std::vector<double>& d) {
    std::vector<KeypointSet> a, b;
    for (std::size_t i : idx) {
      a.push_back(det[i]);
      b.push_back(gt[i]);
    }
    return pck(a, b, d);
  };
  for (const auto& [name, idx] : by_bg) {
    r.by_background[name] = slice(idx, cfg.distances);
    r.curves[name] = slice(idx, cfg.curve_distances);
  }
  for (const auto& [name, idx] : by_dis) r.by_disguise[name] = slice(idx, cfg.distances);
  return r;
}

std::vector<int> sample_gallery(std::span<const int> subjects, int own, int size,
                                std::uint64_t seed, std::size_t probe_index) {
  std::vector<int> others;
  bool has_own = false;
  for (int s : subjects) {
    if (s == own) {
      has_own = true;
    } else {
      others.push_back(s);
    }
  }
  std::sort(others.begin(), others.end());
  others.erase(std::unique(others.begin(), others.end()), others.end());
  if (!has_own) throw ContractError("gallery: probe subject has no reference");
  if (size < 1 || static_cast<std::size_t>(size - 1) > others.size()) {
    throw ContractError("gallery: need " + std::to_string(size) + " subjects with references, have " +
                        std::to_string(others.size() + 1));
  }
  std::mt19937_64 rng(derive_seed(seed, probe_index));
  // Partial Fisher-Yates.
  for (int i = 0; i < size - 1; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(
        static_cast<std::size_t>(i), others.size() - 1)(rng);
    std::swap(others[static_cast<std::size_t>(i)], others[j]);
  }
  std::vector<int> out(others.begin(), others.begin() + (size - 1));
  out.push_back(own);
  std::sort(out.begin(), out.end());
  return out;
}

IdentificationReport evaluate_identification(std::span<const FaceObservation> references,
                                             std::span<const FaceObservation> probes,
                                             const IdentificationConfig& cfg) {
  std::map<int, std::optional<StarNet>> ref_nets;
  std::vector<int> subjects;
  for (const FaceObservation& r : references) {
    if (ref_nets.count(r.subject_id) != 0) {
      throw ContractError("identification: duplicate reference for subject " +
                          std::to_string(r.subject_id));
    }
    subjects.push_back(r.subject_id);
    ref_nets[r.subject_id] = r.keypoints.visible[kNoseIndex]
                                 ? std::optional<StarNet>(build_starnet(r.keypoints))
                                 : std::nullopt;
  }
  if (static_cast<int>(subjects.size()) < cfg.gallery_size) {
    throw ContractError("identification: " + std::to_string(subjects.size()) +
                        " reference subjects, gallery needs " + std::to_string(cfg.gallery_size));
  }

  IdentificationReport report;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const FaceObservation& probe = probes[i];
    ProbeResult res;
    res.subject_id = probe.subject_id;
    res.disguise = probe.disguise;
    const std::vector<int> ids =
        sample_gallery(subjects, probe.subject_id, cfg.gallery_size, cfg.seed, i);
    if (probe.keypoints.visible[kNoseIndex]) {
      res.starnet = build_starnet(probe.keypoints);
      std::vector<GalleryEntry> gallery;
      for (int id : ids) {
        const std::optional<StarNet>& ref = ref_nets[id];
        int common = 0;
        if (ref) {
          for (int s = 0; s < kNumAngles; ++s) common += (ref->valid[s] && res.starnet.valid[s]) ? 1 : 0;
        }
        if (!ref || common < cfg.min_common) {
          res.excluded.push_back(id);
          continue;
        }
        gallery.push_back({id, *ref});
      }
      if (!gallery.empty()) {
        const Identification idn = identify(res.starnet, gallery, cfg.wrap, cfg.min_common);
        res.predicted = idn.subject_id;
        for (std::size_t g = 0; g < gallery.size(); ++g) {
          res.gallery.push_back(gallery[g].subject_id);
          res.taus.push_back(idn.scores[g].tau);
        }
        res.correct = res.predicted == probe.subject_id &&
                      std::find(res.excluded.begin(), res.excluded.end(), probe.subject_id) ==
                          res.excluded.end();
      }
    } else {
      res.excluded = ids;
    }
    Accuracy& slice = report.by_disguise[std::string(to_string(probe.disguise))];
    ++slice.probes;
    ++report.overall.probes;
    if (res.correct) {
      ++slice.correct;
      ++report.overall.correct;
    }
    report.probes.push_back(std::move(res));
  }
  return report;
}

std::vector<FaceObservation> observe(std::span<const AnnotatedFace> faces,
                                     const KeypointDetector* detector,
                                     const AugmentConfig& preprocess) {
  std::vector<FaceObservation> out;
  out.reserve(faces.size());
  for (const AnnotatedFace& f : faces) {
    FaceObservation o{f.subject_id, f.disguise, f.keypoints};
    if (detector != nullptr) {
      const Preprocessed p = preprocess_eval(f, preprocess);
      const KeypointSet det = detector->detect(p.face.image, p.face.keypoints);
      const AffineMap back = p.to_input.inverse();
      for (int k = 0; k < kNumKeypoints; ++k) {
        o.keypoints.points[k] = back.apply(det.points[k]);
        o.keypoints.visible[k] = det.visible[k];
      }
    }
    out.push_back(o);
  }
  return out;
}

std::vector<FaceBox> OracleBoxProvider::locate(const MultiFaceScene& scene) const {
  std::vector<FaceBox> out;
  for (const SceneFace& f : scene.faces) out.push_back(f.box);
  return out;
}

AffineMap box_to_input(const FaceBox& box, Size2 input) {
  if (box.width < 1 || box.height < 1) throw ContractError("face box is empty");
  return AffineMap::translation(-box.x, -box.y)
      .followed_by(AffineMap::scaling(static_cast<double>(input.width) / box.width,
                                      static_cast<double>(input.height) / box.height));
}

namespace {

double iou(const FaceBox& a, const FaceBox& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.width, b.x + b.width);
  const int y1 = std::min(a.y + a.height, b.y + b.height);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double inter = static_cast<double>(x1 - x0) * (y1 - y0);
  return inter / (static_cast<double>(a.width) * a.height + static_cast<double>(b.width) * b.height - inter);
}

}  // namespace

MultiFaceReport evaluate_multiface(const KeypointDetector& detector,
                                   std::span<const MultiFaceScene> scenes,
                                   const FaceBoxProvider& provider, const PckConfig& cfg) {
  cfg.validate();
  constexpr double kMinIou = 0.3;
  const Size2 input = detector.input_size();
  std::map<int, std::pair<std::vector<KeypointSet>, std::vector<KeypointSet>>> groups;
  MultiFaceReport report;
  for (const MultiFaceScene& scene : scenes) {
    const std::vector<FaceBox> boxes = provider.locate(scene);
    if (boxes.empty()) {
      ++report.skipped_scenes;
      continue;
    }
    std::vector<KeypointSet> found(scene.faces.size());  // default: nothing detected
    std::vector<double> best_iou(scene.faces.size(), 0.0);
    for (const FaceBox& box : boxes) {
      std::size_t match = scene.faces.size();
      double score = kMinIou;
      for (std::size_t f = 0; f < scene.faces.size(); ++f) {
        const double v = iou(box, scene.faces[f].box);
        if (v >= score && v > best_iou[f]) {
          score = v;
          match = f;
        }
      }
      if (match == scene.faces.size()) continue;
      const AffineMap to_input = box_to_input(box, input);
      const Transformed cropped =
          crop(scene.image, scene.faces[match].keypoints, {box.x, box.y}, {box.width, box.height});
      const Transformed net_in = resize(cropped.image, cropped.keypoints, input);
      const KeypointSet det = detector.detect(net_in.image, net_in.keypoints);
      const AffineMap back = to_input.inverse();
      KeypointSet mapped;
      for (int k = 0; k < kNumKeypoints; ++k) {
        mapped.points[k] = back.apply(det.points[k]);
        mapped.visible[k] = det.visible[k];
      }
      found[match] = mapped;
      best_iou[match] = score;
    }
    auto& [dets, truths] = groups[static_cast<int>(scene.faces.size())];
    for (std::size_t f = 0; f < scene.faces.size(); ++f) {
      dets.push_back(found[f]);
      truths.push_back(scene.faces[f].keypoints);
    }
  }
  for (const auto& [count, pair] : groups) {
    report.by_face_count[count] = pck(pair.first, pair.second, cfg.distances);
  }
  return report;
}

}  // namespace dfi

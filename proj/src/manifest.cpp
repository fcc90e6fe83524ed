#include "dfi/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

#include "dfi/errors.hpp"
#include "dfi/png_io.hpp"
#include "dfi/seed.hpp"

namespace dfi {

using nlohmann::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

KeypointSet ManifestRecord::keypoint_set() const { return {keypoints, visible}; }

std::vector<std::size_t> DatasetManifest::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(i);
  }
  return out;
}

AnnotatedFace load_face(const DatasetManifest& m, const ManifestRecord& r) {
  AnnotatedFace f;
  f.image = load_png(m.resolve(r));
  f.keypoints = r.keypoint_set();
  f.occluded = r.occluded;
  f.subject_id = r.subject_id;
  f.disguise = r.disguise;
  f.background = r.background;
  return f;
}

namespace {

json to_json(const ManifestRecord& r) {
  json kps = json::array();
  for (const Point2& p : r.keypoints) kps.push_back({p.x, p.y});
  json out;
  out["image_path"] = r.image_path;
  out["subject_id"] = r.subject_id;
  out["disguise"] = to_string(r.disguise);
  out["background"] = to_string(r.background);
  out["keypoints"] = std::move(kps);
  out["visible"] = r.visible;
  out["occluded"] = r.occluded;
  out["split"] = to_string(r.split);
  return out;
}

ManifestRecord record_from_json(const json& j, std::size_t index) {
  auto fail = [index](const std::string& why) -> ParseError {
    return ParseError("manifest record " + std::to_string(index) + ": " + why);
  };
  try {
    ManifestRecord r;
    r.image_path = j.at("image_path").get<std::string>();
    r.subject_id = j.at("subject_id").get<int>();
    const auto d = parse_disguise(j.at("disguise").get<std::string>());
    if (!d) throw fail("unknown disguise");
    r.disguise = *d;
    const auto b = parse_background(j.at("background").get<std::string>());
    if (!b) throw fail("unknown background");
    r.background = *b;
    const auto s = parse_split(j.at("split").get<std::string>());
    if (!s) throw fail("unknown split");
    r.split = *s;
    const json& kps = j.at("keypoints");
    const json& vis = j.at("visible");
    const json& occ = j.at("occluded");
    if (!kps.is_array() || kps.size() != kNumKeypoints) {
      throw fail("expected 14 keypoints, found " + std::to_string(kps.is_array() ? kps.size() : 0));
    }
    if (!vis.is_array() || vis.size() != kNumKeypoints) throw fail("expected 14 visible flags");
    if (!occ.is_array() || occ.size() != kNumKeypoints) throw fail("expected 14 occluded flags");
    for (int i = 0; i < kNumKeypoints; ++i) {
      const json& p = kps[static_cast<std::size_t>(i)];
      if (!p.is_array() || p.size() != 2) throw fail("keypoint " + std::to_string(i) + " is not [x,y]");
      r.keypoints[i] = {p[0].get<double>(), p[1].get<double>()};
      r.visible[i] = vis[static_cast<std::size_t>(i)].get<bool>();
      r.occluded[i] = occ[static_cast<std::size_t>(i)].get<bool>();
    }
    return r;
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("manifest record " + std::to_string(index) + ": " + e.what());
    }
    m.records.push_back(record_from_json(j, index));
    ++index;
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  for (const ManifestRecord& r : m.records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed for manifest '" + path.string() + "'");
}

DatasetManifest generate_dataset(const DatasetOptions& opts, const std::filesystem::path& out_dir) {
  if (opts.n_subjects < 1 || opts.per_subject < 0) {
    throw ContractError("generate_dataset: need at least one subject");
  }
  if (opts.per_subject > 0 && opts.disguises.empty()) {
    throw ContractError("generate_dataset: empty disguise list");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create '" + (out_dir / "images").string() + "': " + ec.message());

  const std::vector<FaceParams> subjects =
      sample_subjects(opts.generator, opts.n_subjects, derive_seed(opts.seed, 0x5eed5ULL));
  const int per = 1 + opts.per_subject;
  const std::size_t total = static_cast<std::size_t>(opts.n_subjects) * per;

  DatasetManifest m;
  m.base_dir = out_dir;
  m.records.resize(total);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(total); ++r) {
    const int s = static_cast<int>(r / per);
    const int j = static_cast<int>(r % per);
    const Disguise d =
        j == 0 ? Disguise::none
               : opts.disguises[static_cast<std::size_t>(s * opts.per_subject + (j - 1)) %
                                opts.disguises.size()];
    const AnnotatedFace face = generate_face(subjects[static_cast<std::size_t>(s)], d,
                                             opts.background,
                                             derive_seed(opts.seed, static_cast<std::uint64_t>(r)),
                                             opts.generator);
    char name[64];
    std::snprintf(name, sizeof(name), "images/s%03d_%03d.png", s, j);
    save_png(face.image, out_dir / name);
    ManifestRecord& rec = m.records[static_cast<std::size_t>(r)];
    rec.image_path = name;
    rec.subject_id = face.subject_id;
    rec.disguise = d;
    rec.background = opts.background;
    rec.keypoints = face.keypoints.points;
    rec.visible = face.keypoints.visible;
    rec.occluded = face.occluded;
  }

  // Subject-major order, shuffled within each subject, dealt onto a
  // train/train/val/test cycle that runs across subject boundaries.
  std::mt19937_64 rng(derive_seed(opts.seed, 0x5b1175ULL));
  constexpr Split kCycle[4] = {Split::train, Split::train, Split::val, Split::test};
  std::size_t dealt = 0;
  for (int s = 0; s < opts.n_subjects; ++s) {
    std::vector<std::size_t> order(static_cast<std::size_t>(per));
    std::iota(order.begin(), order.end(), static_cast<std::size_t>(s) * per);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) m.records[idx].split = kCycle[dealt++ % 4];
  }

  save_manifest(m, out_dir / kManifestName);
  return m;
}

}  // namespace dfi

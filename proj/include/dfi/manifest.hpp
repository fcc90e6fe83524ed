#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfi/image.hpp"
#include "dfi/synth.hpp"

namespace dfi {

enum class Split { train, val, test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct ManifestRecord {
  std::string image_path;  // relative to the manifest's directory
  int subject_id = 0;
  Disguise disguise = Disguise::none;
  Background background = Background::simple;
  std::array<Point2, kNumKeypoints> keypoints{};
  std::array<bool, kNumKeypoints> visible{};
  std::array<bool, kNumKeypoints> occluded{};
  Split split = Split::train;

  KeypointSet keypoint_set() const;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::vector<std::size_t> indices(Split s) const;
  std::filesystem::path resolve(const ManifestRecord& r) const { return base_dir / r.image_path; }
};

/// Loads the record's image and annotations.
AnnotatedFace load_face(const DatasetManifest& m, const ManifestRecord& r);

/// JSON-lines: one record per line. Throws IoError / ParseError (naming the
/// 0-based record index).
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

struct DatasetOptions {
  int n_subjects = 25;
  int per_subject = 10;
  Background background = Background::simple;
  std::uint64_t seed = 0;
  GeneratorConfig generator{};
  /// Disguises cycled through for the per-subject disguised images.
  std::vector<Disguise> disguises{kAllDisguises.begin(), kAllDisguises.end()};
};

inline constexpr std::string_view kManifestName = "manifest.jsonl";

/// Renders one reference plus `per_subject` disguised images per subject into
/// `out_dir`/images, assigns 2:1:1 train/val/test splits stratified by
/// subject, and writes `out_dir`/manifest.jsonl.
DatasetManifest generate_dataset(const DatasetOptions& opts, const std::filesystem::path& out_dir);

}  // namespace dfi

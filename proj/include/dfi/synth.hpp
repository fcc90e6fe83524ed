#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dfi/image.hpp"

namespace dfi {

enum class Disguise {
  none,
  sunglasses,
  cap,
  scarf,
  beard,
  glasses_cap,
  glasses_scarf,
  glasses_beard,
  cap_scarf,
  cap_beard,
  cap_glasses_scarf,
};

/// The ten disguises in the order generated datasets cycle through them.
inline constexpr std::array<Disguise, 10> kAllDisguises = {
    Disguise::sunglasses,    Disguise::cap,         Disguise::scarf,
    Disguise::beard,         Disguise::glasses_cap, Disguise::glasses_scarf,
    Disguise::glasses_beard, Disguise::cap_scarf,   Disguise::cap_beard,
    Disguise::cap_glasses_scarf};

std::string_view to_string(Disguise d);
/// Accepts the names produced by to_string ("cap+glasses+scarf", ...).
std::optional<Disguise> parse_disguise(std::string_view s);

enum class Background { simple, complex };

std::string_view to_string(Background b);
std::optional<Background> parse_background(std::string_view s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Generator settings. Lengths are fractions of the image side.
struct GeneratorConfig {
  int image_size = 256;
  Range head_a{0.26, 0.29};       // horizontal semi-axis
  Range head_b{0.33, 0.37};       // vertical semi-axis
  Range eye_span{0.24, 0.30};     // distance between eye centers
  Range eye_height{0.03, 0.08};   // eye line above head center
  Range eye_width{0.050, 0.060};  // eye half-length
  Range brow_offset{0.075, 0.095};
  Range nose_length{0.14, 0.19};  // eye line to nose tip
  Range mouth_width{0.16, 0.22};
  Range mouth_offset{0.085, 0.11};  // nose tip to mouth line
  double position_jitter = 0.04;
  double separation_margin = 0.15;  // minimum star-net τ between subjects (radians)
  int clutter_min = 20;
  int clutter_max = 60;
  // Complex scenes also get a few thin shapes drawn over everything,
  // face included (foliage, wires). Ground truth is unaffected.
  int foreground_min = 4;
  int foreground_max = 12;
};

/// Per-subject face geometry, in pixels.
struct FaceParams {
  int subject_id = 0;
  double eye_span = 0;
  double eye_height = 0;
  double eye_width = 0;
  double brow_offset = 0;
  double nose_length = 0;
  double mouth_width = 0;
  double mouth_offset = 0;
  double head_a = 0;
  double head_b = 0;

  friend bool operator==(const FaceParams&, const FaceParams&) = default;
};

/// Exact analytic keypoints of a face whose head ellipse is centered at `center`.
KeypointSet face_keypoints(const FaceParams& p, Point2 center);

/// True when all lengths are positive and every feature fits inside the head ellipse.
bool params_valid(const FaceParams& p);

/// Draws `n` subjects, resampling any subject whose upright star-net lies
/// closer than the separation margin to an earlier one.
std::vector<FaceParams> sample_subjects(const GeneratorConfig& cfg, int n, std::uint64_t seed);

struct AnnotatedFace {
  Image image;
  KeypointSet keypoints;
  std::array<bool, kNumKeypoints> occluded{};
  int subject_id = 0;
  Disguise disguise = Disguise::none;
  Background background = Background::simple;
};

/// Feature labels written by the rasterizer, one byte per pixel.
enum FeatureLabel : std::uint8_t {
  kLabelNone = 0,
  kLabelHead,
  kLabelBrowLeft,
  kLabelBrowRight,
  kLabelEyeLeft,
  kLabelEyeRight,
  kLabelNoseTip,
  kLabelMouth,
};

struct RenderedFace {
  AnnotatedFace face;
  std::vector<std::uint8_t> labels;    // facial feature coverage before disguises
  std::vector<std::uint8_t> occluder;  // 1 where a disguise overlay was drawn
};

/// Renders one face. Deterministic in (params, disguise, background, seed, cfg).
RenderedFace render_face(const FaceParams& params, Disguise disguise, Background background,
                         std::uint64_t seed, const GeneratorConfig& cfg);

AnnotatedFace generate_face(const FaceParams& params, Disguise disguise, Background background,
                            std::uint64_t seed, const GeneratorConfig& cfg = {});

struct FaceBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct SceneFace {
  FaceBox box;
  KeypointSet keypoints;  // scene coordinates
  int subject_id = 0;
};

/// Several faces side by side on one canvas, one tile per face.
struct MultiFaceScene {
  Image image;
  std::vector<SceneFace> faces;
};

MultiFaceScene generate_scene(const std::vector<FaceParams>& subjects, Background background,
                              std::uint64_t seed, const GeneratorConfig& cfg);

}  // namespace dfi

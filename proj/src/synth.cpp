#include "dfi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dfi/errors.hpp"
#include "dfi/seed.hpp"
#include "dfi/starnet.hpp"

namespace dfi {

namespace {

using Color = std::array<float, 3>;
using Rng = std::mt19937_64;

struct Components {
  bool glasses = false;
  bool cap = false;
  bool scarf = false;
  bool beard = false;
};

Components components(Disguise d) {
  switch (d) {
    case Disguise::none: return {};
    case Disguise::sunglasses: return {true, false, false, false};
    case Disguise::cap: return {false, true, false, false};
    case Disguise::scarf: return {false, false, true, false};
    case Disguise::beard: return {false, false, false, true};
    case Disguise::glasses_cap: return {true, true, false, false};
    case Disguise::glasses_scarf: return {true, false, true, false};
    case Disguise::glasses_beard: return {true, false, false, true};
    case Disguise::cap_scarf: return {false, true, true, false};
    case Disguise::cap_beard: return {false, true, false, true};
    case Disguise::cap_glasses_scarf: return {true, true, true, false};
  }
  return {};
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double uniform(Rng& rng, Range r) { return uniform(rng, r.lo, r.hi); }

Color random_color(Rng& rng, float lo = 0.05f, float hi = 0.95f) {
  std::uniform_real_distribution<float> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Color scaled(const Color& c, float s) {
  return {std::clamp(c[0] * s, 0.0f, 1.0f), std::clamp(c[1] * s, 0.0f, 1.0f),
          std::clamp(c[2] * s, 0.0f, 1.0f)};
}

/// Image plus the bookkeeping layers the rasterizer maintains.
class Canvas {
 public:
  explicit Canvas(int size)
      : image_(size, size, 3),
        labels_(static_cast<std::size_t>(size) * size, kLabelNone),
        occluder_(static_cast<std::size_t>(size) * size, 0) {}

  void fill(const Color& c) {
    for (int y = 0; y < image_.height; ++y)
      for (int x = 0; x < image_.width; ++x) put(x, y, c);
  }

  /// Paints every pixel whose center satisfies `inside`, within the clipped box.
  template <typename Inside, typename Paint>
  void shade(double x0, double y0, double x1, double y1, Inside inside, Paint paint) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(image_.width - 1, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(image_.height - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y) {
      for (int x = ix0; x <= ix1; ++x) {
        if (inside(static_cast<double>(x), static_cast<double>(y))) paint(x, y);
      }
    }
  }

  template <typename Inside>
  void draw(double x0, double y0, double x1, double y1, Inside inside, const Color& c,
            std::uint8_t label = kLabelNone, bool occluding = false) {
    shade(x0, y0, x1, y1, inside, [&](int x, int y) {
      put(x, y, c);
      if (label != kLabelNone) labels_[index(x, y)] = label;
      if (occluding) occluder_[index(x, y)] = 1;
    });
  }

  void ellipse(Point2 c, double rx, double ry, const Color& col, std::uint8_t label = kLabelNone,
               bool occluding = false) {
    draw(
        c.x - rx, c.y - ry, c.x + rx, c.y + ry,
        [&](double x, double y) {
          const double u = (x - c.x) / rx;
          const double v = (y - c.y) / ry;
          return u * u + v * v <= 1.0;
        },
        col, label, occluding);
  }

  void rect(double x0, double y0, double x1, double y1, const Color& col,
            std::uint8_t label = kLabelNone, bool occluding = false) {
    draw(
        x0, y0, x1, y1,
        [&](double x, double y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }, col, label,
        occluding);
  }

  /// Thick segment (capsule) from a to b.
  void segment(Point2 a, Point2 b, double half_width, const Color& col) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = std::max(dx * dx + dy * dy, 1e-12);
    draw(
        std::min(a.x, b.x) - half_width, std::min(a.y, b.y) - half_width,
        std::max(a.x, b.x) + half_width, std::max(a.y, b.y) + half_width,
        [&](double x, double y) {
          const double t = std::clamp(((x - a.x) * dx + (y - a.y) * dy) / len2, 0.0, 1.0);
          const double ex = x - (a.x + t * dx);
          const double ey = y - (a.y + t * dy);
          return ex * ex + ey * ey <= half_width * half_width;
        },
        col);
  }

  /// Triangle with one vertex at `apex` and base endpoints `l`, `r`.
  void triangle(Point2 p0, Point2 p1, Point2 p2, const Color& col) {
    auto edge = [](Point2 a, Point2 b, double x, double y) {
      return (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
    };
    draw(
        std::min({p0.x, p1.x, p2.x}), std::min({p0.y, p1.y, p2.y}), std::max({p0.x, p1.x, p2.x}),
        std::max({p0.y, p1.y, p2.y}),
        [&](double x, double y) {
          const double e0 = edge(p0, p1, x, y);
          const double e1 = edge(p1, p2, x, y);
          const double e2 = edge(p2, p0, x, y);
          return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
        },
        col);
  }

  void put(int x, int y, const Color& c) {
    for (int k = 0; k < 3; ++k) image_.at(x, y, k) = c[k];
  }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * image_.width + x; }

  Image& image() { return image_; }
  std::vector<std::uint8_t>& labels() { return labels_; }
  std::vector<std::uint8_t>& occluder() { return occluder_; }

 private:
  Image image_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint8_t> occluder_;
};

// Shape constants, as fractions of the image side.
constexpr double kBrowThickness = 0.025;
constexpr double kBrowExtend = 1.15;  // brow half-length / eye half-length
constexpr double kEyeAspect = 0.45;   // eye half-height / half-length
constexpr double kNoseTipRadius = 0.03;
constexpr double kNoseHalfWidth = 0.04;
constexpr double kMouthHalfHeight = 0.022;
constexpr double kLensMargin = 0.02;
constexpr double kCapMargin = 0.015;
constexpr double kScarfMargin = 0.02;

void draw_background(Canvas& canvas, Background bg, Rng& rng, const GeneratorConfig& cfg) {
  const double S = cfg.image_size;
  canvas.fill(random_color(rng, 0.1f, 0.9f));
  if (bg == Background::simple) return;
  const int n = std::uniform_int_distribution<int>(cfg.clutter_min, cfg.clutter_max)(rng);
  for (int i = 0; i < n; ++i) {
    const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
    const Color col = random_color(rng, 0.0f, 1.0f);
    const Point2 c{uniform(rng, 0, S), uniform(rng, 0, S)};
    const double w = uniform(rng, 0.03, 0.3) * S;
    const double h = uniform(rng, 0.03, 0.3) * S;
    switch (kind) {
      case 0: canvas.rect(c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2, col); break;
      case 1: canvas.ellipse(c, w / 2, h / 2, col); break;
      case 2: {
        const Point2 d{c.x + uniform(rng, -0.3, 0.3) * S, c.y + uniform(rng, -0.3, 0.3) * S};
        canvas.segment(c, d, uniform(rng, 0.005, 0.015) * S, col);
        break;
      }
      default: {
        // Small dark blobs resembling eyes and nostrils.
        const double r = uniform(rng, 0.015, 0.04) * S;
        canvas.ellipse(c, r, r * uniform(rng, 0.4, 1.0), scaled(col, 0.25f));
        break;
      }
    }
  }
}

void draw_foreground(Canvas& canvas, Rng& rng, const GeneratorConfig& cfg) {
  const double S = cfg.image_size;
  const int n = std::uniform_int_distribution<int>(cfg.foreground_min, cfg.foreground_max)(rng);
  for (int i = 0; i < n; ++i) {
    const Color col = random_color(rng, 0.0f, 1.0f);
    const Point2 a{uniform(rng, 0, S), uniform(rng, 0, S)};
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
      const double r = uniform(rng, 0.015, 0.04) * S;
      canvas.ellipse(a, r, r * uniform(rng, 0.4, 1.0), scaled(col, 0.25f));
    } else {
      const Point2 b{a.x + uniform(rng, -0.4, 0.4) * S, a.y + uniform(rng, -0.4, 0.4) * S};
      canvas.segment(a, b, uniform(rng, 0.004, 0.01) * S, col);
    }
  }
}

}  // namespace

std::string_view to_string(Disguise d) {
  switch (d) {
    case Disguise::none: return "none";
    case Disguise::sunglasses: return "sunglasses";
    case Disguise::cap: return "cap";
    case Disguise::scarf: return "scarf";
    case Disguise::beard: return "beard";
    case Disguise::glasses_cap: return "glasses+cap";
    case Disguise::glasses_scarf: return "glasses+scarf";
    case Disguise::glasses_beard: return "glasses+beard";
    case Disguise::cap_scarf: return "cap+scarf";
    case Disguise::cap_beard: return "cap+beard";
    case Disguise::cap_glasses_scarf: return "cap+glasses+scarf";
  }
  return "none";
}

std::optional<Disguise> parse_disguise(std::string_view s) {
  if (s == "none") return Disguise::none;
  for (Disguise d : kAllDisguises) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::string_view to_string(Background b) { return b == Background::simple ? "simple" : "complex"; }

std::optional<Background> parse_background(std::string_view s) {
  if (s == "simple") return Background::simple;
  if (s == "complex") return Background::complex;
  return std::nullopt;
}

KeypointSet face_keypoints(const FaceParams& p, Point2 c) {
  const double eye_y = c.y - p.eye_height;
  const Point2 left_eye{c.x - p.eye_span / 2, eye_y};
  const Point2 right_eye{c.x + p.eye_span / 2, eye_y};
  const double ew = p.eye_width;
  const double bw = p.eye_width * kBrowExtend;
  const double brow_y = eye_y - p.brow_offset;
  const double nose_y = eye_y + p.nose_length;
  const double mouth_y = nose_y + p.mouth_offset;

  KeypointSet k;
  k.points = {{
      {left_eye.x - bw, brow_y},
      {left_eye.x + bw, brow_y},
      {right_eye.x - bw, brow_y},
      {right_eye.x + bw, brow_y},
      {left_eye.x - ew, eye_y},
      left_eye,
      {left_eye.x + ew, eye_y},
      {right_eye.x - ew, eye_y},
      right_eye,
      {right_eye.x + ew, eye_y},
      {c.x, nose_y},
      {c.x - p.mouth_width / 2, mouth_y},
      {c.x, mouth_y},
      {c.x + p.mouth_width / 2, mouth_y},
  }};
  k.visible.fill(true);
  return k;
}

bool params_valid(const FaceParams& p) {
  for (double v : {p.eye_span, p.eye_height, p.eye_width, p.brow_offset, p.nose_length,
                   p.mouth_width, p.mouth_offset, p.head_a, p.head_b}) {
    if (!(v > 0.0)) return false;
  }
  if (p.eye_span <= 2.0 * p.eye_width * kBrowExtend) return false;  // brows must not merge
  const KeypointSet k = face_keypoints(p, {0.0, 0.0});
  for (const Point2& q : k.points) {
    const double u = q.x / p.head_a;
    const double v = q.y / p.head_b;
    if (u * u + v * v > 0.85 * 0.85) return false;
  }
  return true;
}

std::vector<FaceParams> sample_subjects(const GeneratorConfig& cfg, int n, std::uint64_t seed) {
  if (n < 0) throw ContractError("sample_subjects: negative count");
  const double S = cfg.image_size;
  std::vector<FaceParams> out;
  std::vector<StarNet> nets;
  constexpr int kMaxAttempts = 10000;
  for (int id = 0; id < n; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(attempt)));
      FaceParams p;
      p.subject_id = id;
      p.head_a = uniform(rng, cfg.head_a) * S;
      p.head_b = uniform(rng, cfg.head_b) * S;
      p.eye_span = uniform(rng, cfg.eye_span) * S;
      p.eye_height = uniform(rng, cfg.eye_height) * S;
      p.eye_width = uniform(rng, cfg.eye_width) * S;
      p.brow_offset = uniform(rng, cfg.brow_offset) * S;
      p.nose_length = uniform(rng, cfg.nose_length) * S;
      p.mouth_width = uniform(rng, cfg.mouth_width) * S;
      p.mouth_offset = uniform(rng, cfg.mouth_offset) * S;
      if (!params_valid(p)) continue;
      const StarNet net = build_starnet(face_keypoints(p, {0.0, 0.0}));
      bool separated = true;
      for (const StarNet& other : nets) {
        if (similarity(net, other, true, 1).tau < cfg.separation_margin) {
          separated = false;
          break;
        }
      }
      if (!separated) continue;
      out.push_back(p);
      nets.push_back(net);
      placed = true;
    }
    if (!placed) {
      throw ContractError("sample_subjects: cannot place subject " + std::to_string(id) +
                          " at the configured separation margin");
    }
  }
  return out;
}

RenderedFace render_face(const FaceParams& p, Disguise disguise, Background background,
                         std::uint64_t seed, const GeneratorConfig& cfg) {
  if (!params_valid(p)) throw ContractError("render_face: invalid face parameters");
  const double S = cfg.image_size;
  Rng rng(seed);
  Canvas canvas(cfg.image_size);
  draw_background(canvas, background, rng, cfg);

  const double mid = (S - 1) / 2.0;
  const Point2 c{mid + uniform(rng, -1, 1) * cfg.position_jitter * S,
                 mid + uniform(rng, -1, 1) * cfg.position_jitter * S};
  const KeypointSet k = face_keypoints(p, c);

  const float tone = static_cast<float>(uniform(rng, 0.55, 0.92));
  const Color skin{tone, tone * static_cast<float>(uniform(rng, 0.7, 0.85)),
                   tone * static_cast<float>(uniform(rng, 0.55, 0.75))};
  const Color hair = random_color(rng, 0.03f, 0.3f);
  const Color iris = random_color(rng, 0.02f, 0.35f);
  const Color lips{static_cast<float>(uniform(rng, 0.55, 0.85)),
                   static_cast<float>(uniform(rng, 0.15, 0.35)),
                   static_cast<float>(uniform(rng, 0.2, 0.4))};

  canvas.ellipse(c, p.head_a, p.head_b, skin, kLabelHead);

  const double bt = kBrowThickness * S / 2;
  canvas.rect(k.points[0].x, k.points[0].y - bt, k.points[1].x, k.points[1].y + bt, hair,
              kLabelBrowLeft);
  canvas.rect(k.points[2].x, k.points[2].y - bt, k.points[3].x, k.points[3].y + bt, hair,
              kLabelBrowRight);

  const double eh = p.eye_width * kEyeAspect;
  const Color sclera{0.93f, 0.93f, 0.9f};
  canvas.ellipse(k.points[5], p.eye_width, eh, sclera, kLabelEyeLeft);
  canvas.ellipse(k.points[5], eh * 0.85, eh * 0.85, iris, kLabelEyeLeft);
  canvas.ellipse(k.points[8], p.eye_width, eh, sclera, kLabelEyeRight);
  canvas.ellipse(k.points[8], eh * 0.85, eh * 0.85, iris, kLabelEyeRight);

  const Point2 nose = k.points[kNoseIndex];
  const double nose_top = k.points[5].y + 0.15 * p.nose_length;
  canvas.triangle({c.x, nose_top}, {c.x - kNoseHalfWidth * S, nose.y},
                  {c.x + kNoseHalfWidth * S, nose.y}, scaled(skin, 0.88f));
  const double tip = kNoseTipRadius * S;
  canvas.ellipse(nose, tip, tip, scaled(skin, 0.72f), kLabelNoseTip);

  const double mh = kMouthHalfHeight * S;
  canvas.ellipse(k.points[12], p.mouth_width / 2, mh, lips, kLabelMouth);

  // Disguise overlays go on top of the finished face.
  const Components parts = components(disguise);
  const double mouth_y = k.points[12].y;
  if (parts.beard) {
    const Color beard = hair;
    const double top = mouth_y + mh + 0.012 * S;
    std::normal_distribution<float> grain(0.0f, 0.06f);
    canvas.shade(
        c.x - p.head_a, top, c.x + p.head_a, c.y + p.head_b,
        [&](double x, double y) {
          const double u = (x - c.x) / p.head_a;
          const double v = (y - c.y) / p.head_b;
          return y >= top && u * u + v * v <= 1.0;
        },
        [&](int x, int y) {
          const float g = grain(rng);
          canvas.put(x, y, {std::clamp(beard[0] + g, 0.0f, 1.0f),
                            std::clamp(beard[1] + g, 0.0f, 1.0f),
                            std::clamp(beard[2] + g, 0.0f, 1.0f)});
          canvas.occluder()[canvas.index(x, y)] = 1;
        });
  }
  if (parts.scarf) {
    const Color base = random_color(rng, 0.1f, 0.9f);
    const double top = mouth_y - mh - kScarfMargin * S;
    const double x0 = c.x - p.head_a - 0.06 * S;
    const double x1 = c.x + p.head_a + 0.06 * S;
    const double stripe = std::max(2.0, 0.03 * S);
    canvas.shade(
        x0, top, x1, S, [&](double x, double y) { return x >= x0 && x <= x1 && y >= top; },
        [&](int x, int y) {
          const bool band = static_cast<int>(std::floor((y - top) / stripe)) % 2 == 0;
          canvas.put(x, y, band ? base : scaled(base, 0.7f));
          canvas.occluder()[canvas.index(x, y)] = 1;
        });
  }
  if (parts.glasses) {
    const Color lens = random_color(rng, 0.02f, 0.15f);
    const double m = kLensMargin * S;
    canvas.ellipse(k.points[5], p.eye_width + m, eh + m, lens, kLabelNone, true);
    canvas.ellipse(k.points[8], p.eye_width + m, eh + m, lens, kLabelNone, true);
    const double hw = std::max(0.75, 0.006 * S);
    canvas.rect(k.points[6].x, k.points[6].y - hw, k.points[7].x, k.points[7].y + hw, lens,
                kLabelNone, true);
  }
  if (parts.cap) {
    const Color cap = random_color(rng, 0.1f, 0.9f);
    const double bottom = k.points[0].y + bt + kCapMargin * S;
    canvas.rect(c.x - p.head_a - 0.05 * S, 0.0, c.x + p.head_a + 0.05 * S, bottom, cap,
                kLabelNone, true);
  }

  if (background == Background::complex) draw_foreground(canvas, rng, cfg);

  // Illumination and sensor noise.
  const float gain = static_cast<float>(uniform(rng, 0.85, 1.1));
  std::normal_distribution<float> noise(0.0f, 0.015f);
  for (float& v : canvas.image().data) v = std::clamp(v * gain + noise(rng), 0.0f, 1.0f);

  RenderedFace out;
  out.face.keypoints = k;
  for (int i = 0; i < kNumKeypoints; ++i) {
    out.face.keypoints.visible[i] = in_bounds(k.points[i], cfg.image_size, cfg.image_size);
    const int x = std::clamp(static_cast<int>(std::lround(k.points[i].x)), 0, cfg.image_size - 1);
    const int y = std::clamp(static_cast<int>(std::lround(k.points[i].y)), 0, cfg.image_size - 1);
    out.face.occluded[i] = canvas.occluder()[canvas.index(x, y)] != 0;
  }
  out.face.image = std::move(canvas.image());
  out.face.subject_id = p.subject_id;
  out.face.disguise = disguise;
  out.face.background = background;
  out.labels = std::move(canvas.labels());
  out.occluder = std::move(canvas.occluder());
  return out;
}

AnnotatedFace generate_face(const FaceParams& params, Disguise disguise, Background background,
                            std::uint64_t seed, const GeneratorConfig& cfg) {
  return render_face(params, disguise, background, seed, cfg).face;
}

MultiFaceScene generate_scene(const std::vector<FaceParams>& subjects, Background background,
                              std::uint64_t seed, const GeneratorConfig& cfg) {
  if (subjects.empty()) throw ContractError("generate_scene: no subjects");
  const int S = cfg.image_size;
  MultiFaceScene scene;
  scene.image = Image(S * static_cast<int>(subjects.size()), S, 3);
  Rng rng(seed);
  for (std::size_t f = 0; f < subjects.size(); ++f) {
    const int pick = std::uniform_int_distribution<int>(0, static_cast<int>(kAllDisguises.size()))(rng);
    const Disguise d = pick == 0 ? Disguise::none : kAllDisguises[static_cast<std::size_t>(pick - 1)];
    const AnnotatedFace face = generate_face(subjects[f], d, background, derive_seed(seed, f), cfg);
    const int x0 = S * static_cast<int>(f);
    for (int y = 0; y < S; ++y)
      for (int x = 0; x < S; ++x)
        for (int ch = 0; ch < 3; ++ch) scene.image.at(x0 + x, y, ch) = face.image.at(x, y, ch);
    SceneFace sf;
    sf.box = {x0, 0, S, S};
    sf.subject_id = face.subject_id;
    sf.keypoints = face.keypoints;
    for (Point2& q : sf.keypoints.points) q.x += x0;
    scene.faces.push_back(sf);
  }
  return scene;
}

}  // namespace dfi

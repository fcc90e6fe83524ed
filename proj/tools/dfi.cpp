// dfi: synthetic data, training, detection, identification and evaluation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfi/config.hpp"
#include "dfi/errors.hpp"
#include "dfi/eval.hpp"
#include "dfi/manifest.hpp"
#include "dfi/nn/checkpoint.hpp"
#include "dfi/nn/trainer.hpp"
#include "dfi/png_io.hpp"
#include "dfi/report.hpp"
#include "dfi/seed.hpp"
#include "dfi/starnet.hpp"

namespace fs = std::filesystem;
using namespace dfi;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3, kInvalid = 4, kDiverged = 5 };

RunConfig load_config(const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig::for_preset(Preset::desk) : load_run_config(path);
  cfg.validate();
  return cfg;
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "config.ini", std::ios::binary);
  if (!out) throw IoError("cannot write '" + (dir / "config.ini").string() + "'");
  out << to_text(cfg);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

struct SynthArgs {
  int subjects = 25;
  int per_subject = 10;
  std::string background = "simple";
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

int run_synth(const SynthArgs& a) {
  const RunConfig cfg = load_config(a.config);
  DatasetOptions opts;
  opts.n_subjects = a.subjects;
  opts.per_subject = a.per_subject;
  opts.background = *parse_background(a.background);
  opts.seed = a.seed;
  opts.generator = cfg.generator;
  const DatasetManifest m = generate_dataset(opts, a.out);
  echo_config(cfg, a.out);
  std::size_t counts[3] = {};
  for (const ManifestRecord& r : m.records) ++counts[static_cast<int>(r.split)];
  std::cout << (fs::path(a.out) / kManifestName).string() << "\n"
            << m.records.size() << " images (train " << counts[0] << ", val " << counts[1]
            << ", test " << counts[2] << ")\n";
  return kOk;
}

struct TrainArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_train;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.lr) cfg.train.base_lr = *a.lr;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.seed) {
    cfg.train.seed = *a.seed;
    cfg.init_seed = *a.seed;
  }
  if (a.max_train) cfg.max_train_samples = *a.max_train;
  const std::string manifest_path = a.manifest.empty() ? cfg.manifest : a.manifest;
  const std::string out = a.out.empty() ? cfg.out : a.out;
  if (manifest_path.empty() || out.empty()) {
    std::cerr << "train: --manifest and --out are required (or set them under [paths])\n";
    return kUsage;
  }
  cfg.validate();
  const DatasetManifest manifest = load_manifest(manifest_path);
  make_dir(out);
  echo_config(cfg, out);

  nn::Regressor net = cfg.make_network();
  nn::TrainOptions opts{cfg.train, cfg.augment, cfg.heatmap, {}};
  if (!a.quiet) {
    opts.on_epoch = [](const nn::EpochRecord& e) {
      std::fprintf(stderr, "epoch %d lr %g loss %.6g val_pck5 %.2f\n", e.epoch, e.lr,
                   e.train_loss, e.val_pck5);
    };
  }
  const nn::TrainingLog log = nn::train(net, manifest, opts, cfg.max_train_samples);
  nn::save_checkpoint(net, fs::path(out) / "model.dfi");
  std::ofstream csv(fs::path(out) / "train_log.csv", std::ios::binary);
  csv << log.csv();
  if (!csv) throw IoError("cannot write train_log.csv");
  std::cout << (fs::path(out) / "model.dfi").string() << "\nbest epoch " << log.best_epoch
            << " val PCK@5 " << log.best_val_pck5 << "\n";
  return kOk;
}

/// Loads an image and runs the detector on it, returning source-image keypoints.
KeypointSet detect_file(const RegressorDetector& det, const RunConfig& cfg, const fs::path& path) {
  AnnotatedFace face;
  face.image = load_png(path);
  return observe(std::span<const AnnotatedFace>(&face, 1), &det, cfg.augment).front().keypoints;
}

void draw_line(Image& img, Point2 a, Point2 b, const float rgb[3]) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)))) + 1;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int x = static_cast<int>(std::lround(a.x + t * (b.x - a.x)));
    const int y = static_cast<int>(std::lround(a.y + t * (b.y - a.y)));
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
    for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
  }
}

void save_overlay(const Image& src, const KeypointSet& kps, const fs::path& path) {
  Image img(src.width, src.height, 3);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = src.at(x, y, src.channels == 3 ? c : 0);
  const float line[3] = {0.2f, 0.5f, 1.0f};
  const float mark[3] = {1.0f, 0.1f, 0.1f};
  if (kps.visible[kNoseIndex]) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      if (k != kNoseIndex && kps.visible[k]) draw_line(img, kps.points[kNoseIndex], kps.points[k], line);
    }
  }
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!kps.visible[k]) continue;
    const Point2 p = kps.points[k];
    draw_line(img, {p.x - 2, p.y}, {p.x + 2, p.y}, mark);
    draw_line(img, {p.x, p.y - 2}, {p.x, p.y + 2}, mark);
  }
  save_png(img, path);
}

RegressorDetector make_detector(const RunConfig& cfg, const std::string& checkpoint) {
  return RegressorDetector(nn::load_checkpoint(checkpoint, cfg.architecture()), cfg.heatmap, cfg.decode);
}

struct DetectArgs {
  std::string checkpoint;
  std::string image;
  std::string config;
  std::string overlay;
};

int run_detect(const DetectArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const RegressorDetector det = make_detector(cfg, a.checkpoint);
  const KeypointSet kps = detect_file(det, cfg, a.image);
  char buf[96];
  for (int k = 0; k < kNumKeypoints; ++k) {
    std::snprintf(buf, sizeof(buf), "%s %.2f %.2f %d\n", std::string(keypoint_name(k)).c_str(),
                  kps.points[k].x, kps.points[k].y, kps.visible[k] ? 1 : 0);
    std::cout << buf;
  }
  if (!a.overlay.empty()) save_overlay(load_png(a.image), kps, a.overlay);
  return kOk;
}

struct IdentifyArgs {
  std::string checkpoint;
  std::string probe;
  std::vector<std::string> gallery;
  std::string config;
};

int run_identify(const IdentifyArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const RegressorDetector det = make_detector(cfg, a.checkpoint);
  std::vector<GalleryEntry> gallery;
  for (std::size_t i = 0; i < a.gallery.size(); ++i) {
    const std::string& g = a.gallery[i];
    int id = static_cast<int>(i);
    std::string path = g;
    if (const auto eq = g.find('='); eq != std::string::npos) {
      try {
        std::size_t used = 0;
        id = std::stoi(g.substr(0, eq), &used);
        if (used != eq) throw std::invalid_argument("id");
      } catch (const std::logic_error&) {
        std::cerr << "identify: bad gallery entry '" << g << "' (expected [ID=]PATH)\n";
        return kUsage;
      }
      path = g.substr(eq + 1);
    }
    gallery.push_back({id, build_starnet(detect_file(det, cfg, path))});
  }
  const StarNet probe = build_starnet(detect_file(det, cfg, a.probe));
  const Identification result =
      identify(probe, gallery, cfg.identification.wrap, cfg.identification.min_common);
  char buf[96];
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const Similarity& s = result.scores[i];
    std::snprintf(buf, sizeof(buf), "subject %d tau %.6f common %d\n", gallery[i].subject_id, s.tau,
                  s.common);
    std::cout << buf;
  }
  std::cout << "match " << result.subject_id << "\n";
  return kOk;
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  std::string config;
  std::string split = "test";
  std::size_t limit = 0;
  std::optional<std::uint64_t> seed;
  bool multiface = false;
  int scenes = 20;
};

int run_evaluate(const EvaluateArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.identification.seed = *a.seed;
  const std::string manifest_path = a.manifest.empty() ? cfg.manifest : a.manifest;
  const std::string out = a.out.empty() ? cfg.out : a.out;
  if (manifest_path.empty() || out.empty()) {
    std::cerr << "evaluate: --manifest and --out are required (or set them under [paths])\n";
    return kUsage;
  }
  const DatasetManifest manifest = load_manifest(manifest_path);
  const RegressorDetector det = make_detector(cfg, a.checkpoint);
  const std::vector<AnnotatedFace> faces = nn::load_split(manifest, *parse_split(a.split), a.limit);

  EvalReport report;
  report.distances = cfg.pck.distances;
  report.detection = evaluate_detector(det, faces, cfg.augment, cfg.pck);

  std::vector<AnnotatedFace> refs;
  for (const ManifestRecord& r : manifest.records) {
    if (r.disguise == Disguise::none) refs.push_back(load_face(manifest, r));
  }
  std::vector<AnnotatedFace> probes;
  for (const AnnotatedFace& f : faces) {
    if (f.disguise != Disguise::none) probes.push_back(f);
  }
  if (!refs.empty() && !probes.empty()) {
    report.identification = evaluate_identification(observe(refs, &det, cfg.augment),
                                                     observe(probes, &det, cfg.augment),
                                                     cfg.identification);
  }

  if (a.multiface) {
    const Background bg = manifest.records.empty() ? Background::simple : manifest.records.front().background;
    const std::uint64_t seed = cfg.identification.seed;
    const std::vector<FaceParams> subjects = sample_subjects(cfg.generator, 3, seed);
    std::vector<MultiFaceScene> scenes;
    for (int n = 2; n <= 3; ++n) {
      const std::vector<FaceParams> group(subjects.begin(), subjects.begin() + n);
      for (int s = 0; s < a.scenes; ++s) {
        scenes.push_back(generate_scene(group, bg, derive_seed(seed, n * 100000 + s), cfg.generator));
      }
    }
    report.multiface = evaluate_multiface(det, scenes, OracleBoxProvider{}, cfg.pck);
  }

  emit_report(report, out);
  echo_config(cfg, out);
  std::cout << fs::path(out).string() << "\n";
  for (std::size_t d = 0; d < report.distances.size(); ++d) {
    std::cout << "average PCK@" << report.distances[d] << " " << report.detection->overall.average(d) << "\n";
  }
  if (report.identification) {
    std::cout << "identification " << report.identification->overall.percent() << "% over "
              << report.identification->overall.probes << " probes\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disguised face identification: synthetic data, keypoint regressor, star-net matching"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic annotated dataset");
  s->add_option("--subjects", synth.subjects, "Number of subjects")->check(CLI::PositiveNumber);
  s->add_option("--per-subject", synth.per_subject, "Disguised images per subject")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--background", synth.background, "simple or complex")
      ->check(CLI::IsMember({"simple", "complex"}));
  s->add_option("--seed", synth.seed, "Generator seed");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--config", synth.config, "Run config file ([generator] section is used)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the keypoint regressor");
  t->add_option("--manifest", train.manifest, "Dataset manifest (manifest.jsonl)");
  t->add_option("--config", train.config, "Run config file");
  t->add_option("--out", train.out, "Output directory for model.dfi and train_log.csv");
  t->add_option("--epochs", train.epochs, "Override train.epochs")->check(CLI::NonNegativeNumber);
  t->add_option("--lr", train.lr, "Override train.base_lr")->check(CLI::PositiveNumber);
  t->add_option("--batch-size", train.batch_size, "Override train.batch_size")->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed, "Override train.seed and network.init_seed");
  t->add_option("--max-train", train.max_train, "Use at most this many training images");
  t->add_flag("--quiet", train.quiet, "Do not print per-epoch progress");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Print the 14 keypoints found in an image");
  d->add_option("--checkpoint", detect.checkpoint, "Trained model")->required();
  d->add_option("--image", detect.image, "Face image (PNG)")->required();
  d->add_option("--config", detect.config, "Run config file");
  d->add_option("--overlay", detect.overlay, "Also write a PNG with keypoints and star-net drawn");

  IdentifyArgs ident;
  auto* i = app.add_subcommand("identify", "Match a probe face against gallery faces");
  i->add_option("--checkpoint", ident.checkpoint, "Trained model")->required();
  i->add_option("--probe", ident.probe, "Probe image (PNG)")->required();
  i->add_option("--gallery", ident.gallery, "Gallery image as [ID=]PATH; repeatable")->required();
  i->add_option("--config", ident.config, "Run config file");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "Score a model on a dataset split and write the report files");
  e->add_option("--checkpoint", eval.checkpoint, "Trained model")->required();
  e->add_option("--manifest", eval.manifest, "Dataset manifest");
  e->add_option("--out", eval.out, "Report directory");
  e->add_option("--config", eval.config, "Run config file");
  e->add_option("--split", eval.split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
  e->add_option("--limit", eval.limit, "Evaluate at most this many images");
  e->add_option("--seed", eval.seed, "Override identification.seed (gallery sampling, scenes)");
  e->add_flag("--multiface", eval.multiface, "Also score 2- and 3-face scenes with oracle face boxes");
  e->add_option("--scenes", eval.scenes, "Scenes per face count for --multiface")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(train);
    if (*d) return run_detect(detect);
    if (*i) return run_identify(ident);
    if (*e) return run_evaluate(eval);
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const DivergenceError& err) {
    std::cerr << "error: training diverged: " << err.what() << "\n";
    return kDiverged;
  } catch (const ContractError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}

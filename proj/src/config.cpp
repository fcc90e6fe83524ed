#include "dfi/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "dfi/errors.hpp"

namespace dfi {

std::string_view to_string(Preset p) { return p == Preset::full ? "full" : "desk"; }

std::optional<Preset> parse_preset(std::string_view text) {
  if (text == "desk") return Preset::desk;
  if (text == "full") return Preset::full;
  return std::nullopt;
}

RunConfig RunConfig::for_preset(Preset p) {
  RunConfig cfg;
  cfg.preset = p;
  if (p == Preset::desk) {
    cfg.generator.image_size = 128;
    cfg.augment = AugmentConfig::desk();
    cfg.train = nn::TrainConfig::desk();
    cfg.heatmap = GaussianSpec::desk();
    cfg.zero_output_init = true;
  }
  return cfg;
}

nn::Architecture RunConfig::architecture() const {
  return preset == Preset::full ? nn::Architecture::full() : nn::Architecture::desk();
}

nn::Regressor RunConfig::make_network() const {
  nn::Regressor net(architecture());
  net.init_he(init_seed, zero_output_init);
  return net;
}

void RunConfig::validate() const {
  augment.validate();
  train.validate();
  heatmap.validate();
  pck.validate();
  const nn::Architecture arch = architecture();
  if (augment.output.width != arch.input.width || augment.output.height != arch.input.height) {
    throw ContractError("config: augment output must match the network input");
  }
  if (heatmap.input_width != arch.input.width || heatmap.input_height != arch.input.height) {
    throw ContractError("config: heatmap input must match the network input");
  }
  const nn::Shape3 out = arch.output();
  if (heatmap.stack_width != out.width || heatmap.stack_height != out.height) {
    throw ContractError("config: heatmap stack must match the network output");
  }
  if (generator.image_size <= 0) throw ContractError("config: image_size must be positive");
  if (generator.clutter_min < 0 || generator.clutter_min > generator.clutter_max ||
      generator.foreground_min < 0 || generator.foreground_min > generator.foreground_max) {
    throw ContractError("config: clutter counts must satisfy 0 <= min <= max");
  }
  if (identification.gallery_size < 1) throw ContractError("config: gallery_size must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  return std::string(buf, std::to_chars(buf, buf + sizeof(buf), v).ptr);
}

template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

struct BadValue {
  std::string what;
};

template <typename T>
T parse_number(std::string_view s) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw BadValue{"expected a number, got '" + std::string(s) + "'"};
  }
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number<double>(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

Range parse_range(std::string_view s) {
  const auto v = parse_list(s);
  if (v.size() != 2 || v[0] > v[1]) throw BadValue{"expected 'lo, hi' with lo <= hi"};
  return {v[0], v[1]};
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DFI_DOUBLE(sec, name, expr)                                                \
  Field {                                                                          \
    sec, name, [](RunConfig& c, std::string_view v) { expr = parse_number<double>(v); }, \
        [](const RunConfig& c) { return fmt(expr); }                               \
  }
#define DFI_INT(sec, name, expr)                                                        \
  Field {                                                                               \
    sec, name, [](RunConfig& c, std::string_view v) { expr = parse_number<decltype(expr + 0)>(v); }, \
        [](const RunConfig& c) { return fmt_int(expr); }                                \
  }
#define DFI_BOOL(sec, name, expr)                                         \
  Field {                                                                 \
    sec, name, [](RunConfig& c, std::string_view v) { expr = parse_bool(v); }, \
        [](const RunConfig& c) { return std::string(expr ? "true" : "false"); } \
  }
#define DFI_RANGE(sec, name, expr)                                           \
  Field {                                                                    \
    sec, name, [](RunConfig& c, std::string_view v) { expr = parse_range(v); }, \
        [](const RunConfig& c) { return fmt(expr.lo) + ", " + fmt(expr.hi); }  \
  }
#define DFI_STRING(sec, name, expr)                                              \
  Field {                                                                        \
    sec, name, [](RunConfig& c, std::string_view v) { expr = std::string(trim(v)); }, \
        [](const RunConfig& c) { return expr; }                                  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"network", "preset",
            [](RunConfig& c, std::string_view v) {
              const auto p = parse_preset(trim(v));
              if (!p) throw BadValue{"preset must be desk or full"};
              c.preset = *p;
            },
            [](const RunConfig& c) { return std::string(to_string(c.preset)); }},
      DFI_INT("network", "init_seed", c.init_seed),
      DFI_BOOL("network", "zero_output_init", c.zero_output_init),

      DFI_INT("generator", "image_size", c.generator.image_size),
      DFI_RANGE("generator", "head_a", c.generator.head_a),
      DFI_RANGE("generator", "head_b", c.generator.head_b),
      DFI_RANGE("generator", "eye_span", c.generator.eye_span),
      DFI_RANGE("generator", "eye_height", c.generator.eye_height),
      DFI_RANGE("generator", "eye_width", c.generator.eye_width),
      DFI_RANGE("generator", "brow_offset", c.generator.brow_offset),
      DFI_RANGE("generator", "nose_length", c.generator.nose_length),
      DFI_RANGE("generator", "mouth_width", c.generator.mouth_width),
      DFI_RANGE("generator", "mouth_offset", c.generator.mouth_offset),
      DFI_DOUBLE("generator", "position_jitter", c.generator.position_jitter),
      DFI_DOUBLE("generator", "separation_margin", c.generator.separation_margin),
      DFI_INT("generator", "clutter_min", c.generator.clutter_min),
      DFI_INT("generator", "clutter_max", c.generator.clutter_max),
      DFI_INT("generator", "foreground_min", c.generator.foreground_min),
      DFI_INT("generator", "foreground_max", c.generator.foreground_max),

      DFI_INT("augment", "crop_width", c.augment.crop.width),
      DFI_INT("augment", "crop_height", c.augment.crop.height),
      DFI_DOUBLE("augment", "rotation_range", c.augment.rotation_range),
      DFI_DOUBLE("augment", "flip_prob", c.augment.flip_prob),
      DFI_INT("augment", "output_width", c.augment.output.width),
      DFI_INT("augment", "output_height", c.augment.output.height),
      DFI_BOOL("augment", "enabled", c.augment.enabled),

      Field{"train", "optimizer",
            [](RunConfig& c, std::string_view v) {
              try {
                c.train.optimizer = nn::parse_optimizer(std::string(trim(v)));
              } catch (const ContractError&) {
                throw BadValue{"optimizer must be sgd or adam"};
              }
            },
            [](const RunConfig& c) { return std::string(nn::to_string(c.train.optimizer)); }},
      DFI_DOUBLE("train", "base_lr", c.train.base_lr),
      DFI_DOUBLE("train", "lr_after_drop", c.train.lr_after_drop),
      DFI_INT("train", "drop_epoch", c.train.drop_epoch),
      DFI_DOUBLE("train", "momentum", c.train.momentum),
      DFI_INT("train", "batch_size", c.train.batch_size),
      DFI_INT("train", "epochs", c.train.epochs),
      DFI_INT("train", "seed", c.train.seed),
      DFI_INT("train", "max_val_samples", c.train.max_val_samples),
      DFI_INT("train", "max_train_samples", c.max_train_samples),

      DFI_DOUBLE("heatmap", "sigma", c.heatmap.sigma),
      DFI_INT("heatmap", "stack_width", c.heatmap.stack_width),
      DFI_INT("heatmap", "stack_height", c.heatmap.stack_height),
      DFI_INT("heatmap", "input_width", c.heatmap.input_width),
      DFI_INT("heatmap", "input_height", c.heatmap.input_height),
      Field{"heatmap", "min_peak",
            [](RunConfig& c, std::string_view v) {
              if (trim(v) == "auto") {
                c.decode.min_peak.reset();
              } else {
                c.decode.min_peak = parse_number<double>(v);
              }
            },
            [](const RunConfig& c) {
              return c.decode.min_peak ? fmt(*c.decode.min_peak) : std::string("auto");
            }},
      DFI_BOOL("heatmap", "subpixel", c.decode.subpixel),

      Field{"pck", "distances",
            [](RunConfig& c, std::string_view v) { c.pck.distances = parse_list(v); },
            [](const RunConfig& c) { return fmt_list(c.pck.distances); }},
      Field{"pck", "curve_distances",
            [](RunConfig& c, std::string_view v) { c.pck.curve_distances = parse_list(v); },
            [](const RunConfig& c) { return fmt_list(c.pck.curve_distances); }},

      DFI_INT("identification", "gallery_size", c.identification.gallery_size),
      DFI_INT("identification", "seed", c.identification.seed),
      DFI_BOOL("identification", "wrap", c.identification.wrap),
      DFI_INT("identification", "min_common", c.identification.min_common),

      DFI_STRING("paths", "manifest", c.manifest),
      DFI_STRING("paths", "out", c.out),
  };
  return table;
}

#undef DFI_DOUBLE
#undef DFI_INT
#undef DFI_BOOL
#undef DFI_RANGE
#undef DFI_STRING

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  const auto fail = [&](int line, const std::string& msg) -> ParseError {
    return ParseError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };

  std::set<std::string> sections;
  for (const Field& f : fields()) sections.insert(f.section);

  std::vector<Entry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections.count(section)) throw fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail(line_no, "expected key = value");
    if (section.empty()) throw fail(line_no, "key outside of any section");
    std::string key(trim(line.substr(0, eq)));
    if (!seen.emplace(section, key).second) {
      throw fail(line_no, "duplicate key " + section + "." + key);
    }
    entries.push_back({section, key, std::string(trim(line.substr(eq + 1))), line_no});
  }

  const auto find_field = [&](const Entry& e) -> const Field& {
    for (const Field& f : fields()) {
      if (f.section == e.section && f.key == e.key) return f;
    }
    throw fail(e.line, "unknown key " + e.section + "." + e.key);
  };

  // The preset decides the defaults everything else overrides.
  RunConfig cfg = RunConfig::for_preset(Preset::desk);
  for (const Entry& e : entries) {
    if (e.section == "network" && e.key == "preset") {
      const auto p = parse_preset(e.value);
      if (!p) throw fail(e.line, "preset must be desk or full");
      cfg = RunConfig::for_preset(*p);
    }
  }
  for (const Entry& e : entries) {
    const Field& f = find_field(e);
    try {
      f.set(cfg, e.value);
    } catch (const BadValue& bad) {
      throw fail(e.line, e.section + "." + e.key + ": " + bad.what);
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace dfi

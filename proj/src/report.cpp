#include "dfi/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dfi/errors.hpp"
#include "json.hpp"

namespace dfi {

using nlohmann::json;

namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json table_json(const PckTable& t) {
  json points = json::array();
  for (int p = 0; p < kNumKeypoints; ++p) {
    json acc = json::array();
    for (std::size_t d = 0; d < t.distances.size(); ++d) acc.push_back(t.accuracy(p, d));
    points.push_back({{"name", std::string(keypoint_name(p))},
                      {"visible", t.visible[p]},
                      {"correct", t.correct[p]},
                      {"accuracy", acc}});
  }
  json avg = json::array();
  for (std::size_t d = 0; d < t.distances.size(); ++d) avg.push_back(t.average(d));
  return {{"distances", t.distances}, {"samples", t.samples}, {"points", points}, {"average", avg}};
}

PckTable table_from(const json& j) {
  PckTable t;
  t.distances = j.at("distances").get<std::vector<double>>();
  t.samples = j.at("samples").get<std::size_t>();
  const json& pts = j.at("points");
  if (pts.size() != kNumKeypoints) throw ParseError("report: table needs 14 points");
  for (int p = 0; p < kNumKeypoints; ++p) {
    t.visible[p] = pts[static_cast<std::size_t>(p)].at("visible").get<std::size_t>();
    t.correct[p] = pts[static_cast<std::size_t>(p)].at("correct").get<std::vector<std::size_t>>();
    if (t.correct[p].size() != t.distances.size()) throw ParseError("report: correct/distances mismatch");
  }
  return t;
}

template <typename Map>
json tables_json(const Map& m) {
  json out = json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<typename Map::key_type, int>) {
      out[std::to_string(k)] = table_json(v);
    } else {
      out[k] = table_json(v);
    }
  }
  return out;
}

json accuracy_json(const Accuracy& a) {
  return {{"probes", a.probes}, {"correct", a.correct}, {"accuracy", a.percent()}};
}

Accuracy accuracy_from(const json& j) {
  return {j.at("probes").get<std::size_t>(), j.at("correct").get<std::size_t>()};
}

json starnet_json(const StarNet& s) {
  json out = json::array();
  for (int i = 0; i < kNumAngles; ++i) {
    out.push_back({{"index", angle_keypoint(i) + 1}, {"valid", s.valid[i]}, {"angle_rad", s.angles[i]}});
  }
  return out;
}

StarNet starnet_from(const json& j) {
  if (j.size() != kNumAngles) throw ParseError("report: star-net needs 13 entries");
  StarNet s;
  for (int i = 0; i < kNumAngles; ++i) {
    s.valid[i] = j[static_cast<std::size_t>(i)].at("valid").get<bool>();
    s.angles[i] = j[static_cast<std::size_t>(i)].at("angle_rad").get<double>();
  }
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json j;
  j["distances"] = r.distances;
  if (r.detection) {
    const DetectionReport& d = *r.detection;
    j["detection"] = {{"overall", table_json(d.overall)},
                      {"by_background", tables_json(d.by_background)},
                      {"by_disguise", tables_json(d.by_disguise)},
                      {"curves", tables_json(d.curves)}};
  }
  if (r.identification) {
    const IdentificationReport& id = *r.identification;
    json by = json::object();
    for (const auto& [k, v] : id.by_disguise) by[k] = accuracy_json(v);
    json probes = json::array();
    for (const ProbeResult& p : id.probes) {
      probes.push_back({{"subject_id", p.subject_id},
                        {"disguise", std::string(to_string(p.disguise))},
                        {"predicted", p.predicted},
                        {"correct", p.correct},
                        {"gallery", p.gallery},
                        {"taus", p.taus},
                        {"excluded", p.excluded},
                        {"starnet", starnet_json(p.starnet)}});
    }
    j["identification"] = {{"overall", accuracy_json(id.overall)}, {"by_disguise", by}, {"probes", probes}};
  }
  if (r.multiface) {
    j["multiface"] = {{"by_face_count", tables_json(r.multiface->by_face_count)},
                      {"skipped_scenes", r.multiface->skipped_scenes}};
  }
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.distances = j.at("distances").get<std::vector<double>>();
    if (j.contains("detection")) {
      const json& d = j.at("detection");
      DetectionReport det;
      det.overall = table_from(d.at("overall"));
      for (const auto& [k, v] : d.at("by_background").items()) det.by_background[k] = table_from(v);
      for (const auto& [k, v] : d.at("by_disguise").items()) det.by_disguise[k] = table_from(v);
      for (const auto& [k, v] : d.at("curves").items()) det.curves[k] = table_from(v);
      r.detection = std::move(det);
    }
    if (j.contains("identification")) {
      const json& i = j.at("identification");
      IdentificationReport id;
      id.overall = accuracy_from(i.at("overall"));
      for (const auto& [k, v] : i.at("by_disguise").items()) id.by_disguise[k] = accuracy_from(v);
      for (const json& p : i.at("probes")) {
        ProbeResult pr;
        pr.subject_id = p.at("subject_id").get<int>();
        const auto dis = parse_disguise(p.at("disguise").get<std::string>());
        if (!dis) throw ParseError("report: unknown disguise");
        pr.disguise = *dis;
        pr.predicted = p.at("predicted").get<int>();
        pr.correct = p.at("correct").get<bool>();
        pr.gallery = p.at("gallery").get<std::vector<int>>();
        pr.taus = p.at("taus").get<std::vector<double>>();
        pr.excluded = p.at("excluded").get<std::vector<int>>();
        pr.starnet = starnet_from(p.at("starnet"));
        id.probes.push_back(std::move(pr));
      }
      r.identification = std::move(id);
    }
    if (j.contains("multiface")) {
      MultiFaceReport m;
      for (const auto& [k, v] : j.at("multiface").at("by_face_count").items()) {
        m.by_face_count[std::stoi(k)] = table_from(v);
      }
      m.skipped_scenes = j.at("multiface").at("skipped_scenes").get<std::size_t>();
      r.multiface = std::move(m);
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

std::string pck_table_csv(const EvalReport& r) {
  std::vector<std::pair<std::string, const PckTable*>> columns;
  if (r.detection) {
    if (r.detection->by_background.empty()) {
      columns.emplace_back("", &r.detection->overall);
    } else {
      for (const auto& [name, t] : r.detection->by_background) columns.emplace_back(name + " ", &t);
    }
  }
  std::string out = "point";
  for (const auto& [prefix, t] : columns) {
    for (double d : t->distances) out += "," + prefix + "d=" + number(d);
  }
  out += "\n";
  for (int p = 0; p <= kNumKeypoints; ++p) {
    out += p < kNumKeypoints ? std::string(keypoint_name(p)) : std::string("All");
    for (const auto& [prefix, t] : columns) {
      for (std::size_t d = 0; d < t->distances.size(); ++d) {
        out += "," + number(p < kNumKeypoints ? t->accuracy(p, d) : t->average(d));
      }
    }
    out += "\n";
  }
  return out;
}

std::string curves_csv(const EvalReport& r) {
  std::string out = "series,point,d,accuracy\n";
  if (!r.detection) return out;
  for (const auto& [name, t] : r.detection->curves) {
    for (int p = 0; p < kNumKeypoints; ++p) {
      for (std::size_t d = 0; d < t.distances.size(); ++d) {
        out += name + "," + std::string(keypoint_name(p)) + "," + number(t.distances[d]) + "," +
               number(t.accuracy(p, d)) + "\n";
      }
    }
  }
  return out;
}

std::string identification_csv(const EvalReport& r) {
  std::string out = "disguise,probes,correct,accuracy\n";
  if (!r.identification) return out;
  auto row = [&](const std::string& name, const Accuracy& a) {
    out += name + "," + std::to_string(a.probes) + "," + std::to_string(a.correct) + "," +
           number(a.percent()) + "\n";
  };
  for (const auto& [name, a] : r.identification->by_disguise) row(name, a);
  row("all", r.identification->overall);
  return out;
}

std::string curves_svg(const EvalReport& r) {
  constexpr int kCols = 4;
  constexpr int kPanelW = 220;
  constexpr int kPanelH = 170;
  constexpr int kPad = 30;
  const int rows = (kNumKeypoints + kCols - 1) / kCols;
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCols * kPanelW
    << "\" height=\"" << rows * kPanelH + 30 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"10\" y=\"18\">accuracy (%) vs distance from ground truth (px): "
       "simple = red, complex = green</text>\n";
  auto color = [](const std::string& series) {
    if (series == "simple") return "#d62728";
    if (series == "complex") return "#2ca02c";
    return "#1f77b4";
  };
  for (int p = 0; p < kNumKeypoints; ++p) {
    const int ox = (p % kCols) * kPanelW;
    const int oy = 30 + (p / kCols) * kPanelH;
    const int w = kPanelW - 2 * kPad + 10;
    const int h = kPanelH - 2 * kPad;
    s << "<g transform=\"translate(" << ox + kPad << "," << oy + 10 << ")\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
    s << "<text x=\"4\" y=\"12\">" << keypoint_name(p) << "</text>\n";
    s << "<text x=\"-24\" y=\"4\">100</text><text x=\"-12\" y=\"" << h << "\">0</text>\n";
    if (r.detection) {
      for (const auto& [name, t] : r.detection->curves) {
        if (t.distances.empty()) continue;
        const double dmax = std::max(1.0, t.distances.back());
        s << "<polyline fill=\"none\" stroke=\"" << color(name) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t d = 0; d < t.distances.size(); ++d) {
          const double x = w * t.distances[d] / dmax;
          const double y = h * (1.0 - t.accuracy(p, d) / 100.0);
          s << (d ? " " : "") << number(x) << "," << number(y);
        }
        s << "\"/>\n";
        s << "<text x=\"" << w - 12 << "\" y=\"" << h + 14 << "\">" << number(dmax) << "</text>\n";
      }
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_report(const EvalReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "report.json", report_to_json(r));
  write_text(dir / "table_pck.csv", pck_table_csv(r));
  write_text(dir / "curves.csv", curves_csv(r));
  write_text(dir / "identification.csv", identification_csv(r));
  write_text(dir / "curves.svg", curves_svg(r));
}

}  // namespace dfi

#pragma once

#include <filesystem>
#include <string>

#include "dfi/eval.hpp"

namespace dfi {

std::string report_to_json(const EvalReport& report);
/// Throws ParseError on malformed input.
EvalReport report_from_json(const std::string& text);

/// Rows P1..P14 plus "All"; one column per (background slice, distance), or
/// per distance for the overall table when there are no background slices.
std::string pck_table_csv(const EvalReport& report);
/// series,point,d,accuracy
std::string curves_csv(const EvalReport& report);
/// disguise,probes,correct,accuracy with a final "all" row.
std::string identification_csv(const EvalReport& report);
/// One panel per keypoint with an accuracy-vs-distance polyline per
/// background (simple red, complex green).
std::string curves_svg(const EvalReport& report);

/// Writes report.json, table_pck.csv, curves.csv, identification.csv and
/// curves.svg into `dir` (created if needed).
void emit_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace dfi

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dfi/augment.hpp"
#include "dfi/eval.hpp"
#include "dfi/heatmap.hpp"
#include "dfi/nn/architecture.hpp"
#include "dfi/nn/network.hpp"
#include "dfi/nn/trainer.hpp"
#include "dfi/synth.hpp"

namespace dfi {

enum class Preset { desk, full };

std::string_view to_string(Preset p);
std::optional<Preset> parse_preset(std::string_view text);

/// Everything a run needs. Member initialisers hold the full-size values;
/// for_preset() adjusts them. Config files start from the desk preset
/// (128² input, 32² heatmaps, half-width network) unless they name another.
struct RunConfig {
  Preset preset = Preset::full;
  std::uint64_t init_seed = 0;  // network weight initialisation
  bool zero_output_init = false;
  GeneratorConfig generator;
  AugmentConfig augment;
  nn::TrainConfig train;
  std::size_t max_train_samples = 0;  // 0 = whole train split
  GaussianSpec heatmap;
  DecodeOptions decode;
  PckConfig pck;
  IdentificationConfig identification;
  std::string manifest;  // optional default for --manifest
  std::string out;       // optional default for --out

  nn::Architecture architecture() const;
  /// Fresh network for this config, initialised from init_seed.
  nn::Regressor make_network() const;
  /// Throws ContractError when the parts disagree (e.g. heatmap input vs
  /// augment output) or any part fails its own validation.
  void validate() const;

  static RunConfig for_preset(Preset p);
};

/// Parses `[section]` blocks of `key = value` lines. `#` and `;` start
/// comments. Unknown sections or keys, duplicates and bad values throw
/// ParseError naming `source` and the line.
RunConfig parse_run_config(std::string_view text, std::string_view source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form listing every field; parses back to the same config.
std::string to_text(const RunConfig& cfg);

}  // namespace dfi

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dfi/augment.hpp"
#include "dfi/heatmap.hpp"
#include "dfi/manifest.hpp"
#include "dfi/nn/network.hpp"

namespace dfi::nn {

enum class Optimizer { sgd, adam };

const char* to_string(Optimizer o);
/// Throws ContractError on anything but "sgd" or "adam".
Optimizer parse_optimizer(const std::string& s);

struct TrainConfig {
  Optimizer optimizer = Optimizer::sgd;
  double base_lr = 1e-5;
  double lr_after_drop = 1e-6;
  int drop_epoch = 20;  // epochs 1..drop_epoch use base_lr
  double momentum = 0.9;  // Adam's beta1 when optimizer = adam
  int batch_size = 20;
  int epochs = 90;
  std::uint64_t seed = 0;
  /// Validation samples scored per epoch; 0 means the whole split.
  int max_val_samples = 0;

  void validate() const;
  double lr_for_epoch(int epoch) const { return epoch <= drop_epoch ? base_lr : lr_after_drop; }

  static TrainConfig full() { return {}; }
  /// Settings for the 128×128 desk-scale network.
  static TrainConfig desk();
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean per-sample loss over the epoch
  double val_pck5 = 0.0;    // average PCK@5 in network-input pixels

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_val_pck5 = 0.0;

  /// "epoch,lr,train_loss,val_pck5" plus one row per epoch.
  std::string csv() const;
};

struct TrainOptions {
  TrainConfig train;
  AugmentConfig augment;
  GaussianSpec heatmap;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Minibatch SGD with momentum (or Adam) on the summed squared heatmap error (averaged
/// over the batch). Leaves `net` holding the weights of the epoch with the
/// best validation PCK@5. Throws ContractError on empty splits and
/// DivergenceError on a non-finite loss or gradient.
TrainingLog train(Regressor& net, std::span<const AnnotatedFace> train_set,
                  std::span<const AnnotatedFace> val_set, const TrainOptions& opts);

/// Loads the manifest's train and val splits (optionally truncated) and trains.
TrainingLog train(Regressor& net, const DatasetManifest& manifest, const TrainOptions& opts,
                  std::size_t max_train = 0);

/// Loads every record of a split, in manifest order, optionally truncated.
std::vector<AnnotatedFace> load_split(const DatasetManifest& manifest, Split split,
                                      std::size_t limit = 0);

}  // namespace dfi::nn

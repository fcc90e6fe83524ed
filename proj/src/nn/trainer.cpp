#include "dfi/nn/trainer.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "dfi/errors.hpp"
#include "dfi/eval.hpp"
#include "dfi/nn/optimizer.hpp"
#include "dfi/seed.hpp"

namespace dfi::nn {

const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "adam") return Optimizer::adam;
  throw ContractError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (!(base_lr > 0.0) || !(lr_after_drop > 0.0)) throw ContractError("train config: lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ContractError("train config: momentum must lie in [0, 1)");
  if (batch_size < 1) throw ContractError("train config: batch size must be >= 1");
  if (epochs < 0) throw ContractError("train config: epochs must be >= 0");
}

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  // Plain SGD sits on the all-zero-heatmap plateau at every stable rate.
  c.optimizer = Optimizer::adam;
  c.base_lr = 1e-3;
  c.lr_after_drop = 1e-4;
  c.drop_epoch = 30;
  c.epochs = 40;
  c.batch_size = 10;
  c.max_val_samples = 50;
  return c;
}

namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string TrainingLog::csv() const {
  std::string out = "epoch,lr,train_loss,val_pck5\n";
  for (const EpochRecord& e : epochs) {
    out += std::to_string(e.epoch) + "," + number(e.lr) + "," + number(e.train_loss) + "," +
           number(e.val_pck5) + "\n";
  }
  return out;
}

TrainingLog train(Regressor& net, std::span<const AnnotatedFace> train_set,
                  std::span<const AnnotatedFace> val_set, const TrainOptions& opts) {
  const TrainConfig& cfg = opts.train;
  cfg.validate();
  opts.heatmap.validate();
  if (train_set.empty()) throw ContractError("train: empty training split");
  if (val_set.empty()) throw ContractError("train: empty validation split");
  const Shape3 in = net.input_shape();
  const Shape3 out = net.output_shape();
  if (out.width != opts.heatmap.stack_width || out.height != opts.heatmap.stack_height ||
      in.width != opts.heatmap.input_width || in.height != opts.heatmap.input_height) {
    throw ContractError("train: network shape does not match the heatmap spec");
  }

  // Validation inputs never change; prepare them once.
  const std::size_t n_val =
      cfg.max_val_samples > 0 ? std::min(val_set.size(), static_cast<std::size_t>(cfg.max_val_samples))
                              : val_set.size();
  std::vector<std::vector<float>> val_inputs;
  std::vector<KeypointSet> val_truth;
  for (std::size_t i = 0; i < n_val; ++i) {
    const Preprocessed p = preprocess_eval(val_set[i], opts.augment);
    val_inputs.push_back(image_to_tensor(p.face.image, in.channels));
    val_truth.push_back(p.face.keypoints);
  }
  const double five[1] = {5.0};

  TrainingLog log;
  ParamSet<float> velocity = zero_params<float>(net.architecture());
  AdamState<float> adam{zero_params<float>(net.architecture()), zero_params<float>(net.architecture())};
  ParamSet<float> grads = zero_params<float>(net.architecture());
  ParamSet<float> best = net.params();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr_for_epoch(epoch);
    std::mt19937_64 shuffler(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffler);

    double loss_sum = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(cfg.batch_size));
      const float inv_batch = 1.0f / static_cast<float>(b1 - b0);
      for (auto& g : grads) {
        std::fill(g.weight.begin(), g.weight.end(), 0.0f);
        std::fill(g.bias.begin(), g.bias.end(), 0.0f);
      }
      for (std::size_t b = b0; b < b1; ++b) {
        const std::size_t idx = order[b];
        const AnnotatedFace sample =
            opts.augment.enabled
                ? augment_sample(train_set[idx], opts.augment,
                                 derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch), idx))
                : preprocess_eval(train_set[idx], opts.augment).face;
        const HeatmapStack target = synthesize(sample.keypoints, opts.heatmap);
        const std::vector<float> x = image_to_tensor(sample.image, in.channels);
        const std::span<const float> y = net.forward(x);
        std::vector<float> upstream(y.size());
        const double loss = squared_error<float>(y, target.data, upstream);
        if (!std::isfinite(loss)) {
          throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += loss;
        for (float& g : upstream) g *= inv_batch;
        net.backward(upstream, grads);
      }
      if (cfg.optimizer == Optimizer::adam) {
        adam_step(net.params(), grads, adam, lr, cfg.momentum);
      } else {
        sgd_step(net.params(), grads, velocity, lr, cfg.momentum);
      }
    }

    std::vector<KeypointSet> val_det;
    for (const std::vector<float>& x : val_inputs) {
      const std::span<const float> y = net.forward(x);
      HeatmapStack hm(out.width, out.height, out.channels);
      std::copy(y.begin(), y.end(), hm.data.begin());
      val_det.push_back(decode(hm, opts.heatmap));
    }
    const EpochRecord rec{epoch, lr, loss_sum / static_cast<double>(order.size()),
                          pck(val_det, val_truth, five).average(0)};
    log.epochs.push_back(rec);
    if (log.best_epoch == 0 || rec.val_pck5 > log.best_val_pck5) {
      log.best_epoch = epoch;
      log.best_val_pck5 = rec.val_pck5;
      best = net.params();
    }
    if (opts.on_epoch) opts.on_epoch(rec);
  }
  if (log.best_epoch != 0) net.params() = best;
  return log;
}

std::vector<AnnotatedFace> load_split(const DatasetManifest& manifest, Split split,
                                      std::size_t limit) {
  std::vector<AnnotatedFace> out;
  for (std::size_t i : manifest.indices(split)) {
    if (limit != 0 && out.size() >= limit) break;
    out.push_back(load_face(manifest, manifest.records[i]));
  }
  return out;
}

TrainingLog train(Regressor& net, const DatasetManifest& manifest, const TrainOptions& opts,
                  std::size_t max_train) {
  const std::vector<AnnotatedFace> tr = load_split(manifest, Split::train, max_train);
  const std::vector<AnnotatedFace> va = load_split(
      manifest, Split::val, static_cast<std::size_t>(std::max(0, opts.train.max_val_samples)));
  return train(net, tr, va, opts);
}

}  // namespace dfi::nn

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "irspla/config.hpp"
#include "irspla/errors.hpp"
#include "irspla/fingerprint/fingerprint.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/nn/optim.hpp"
#include "irspla/random.hpp"
#include "irspla/tdgcn/model.hpp"

namespace irspla::tdgcn {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  std::size_t n_slots = 5;
  double pooling_ratio = 0.2;
  double theta = 0.01;
  std::uint64_t seed = 42;
  /// Evaluate the held-out set after every epoch (costs one forward pass
  /// per test sequence).
  bool eval_each_epoch = true;

  static TrainConfig from_config(const KeyValueConfig& kv, const TrainConfig& base) {
    TrainConfig c = base;
    c.lr = kv.get_double("train.lr", c.lr);
    c.weight_decay = kv.get_double("train.weight_decay", c.weight_decay);
    c.batch_size = static_cast<std::size_t>(kv.get_int("train.batch_size", static_cast<long long>(c.batch_size)));
    c.epochs = static_cast<std::size_t>(kv.get_int("train.epochs", static_cast<long long>(c.epochs)));
    c.n_slots = static_cast<std::size_t>(kv.get_int("train.n_slots", static_cast<long long>(c.n_slots)));
    c.pooling_ratio = kv.get_double("train.pooling_ratio", c.pooling_ratio);
    c.theta = kv.get_double("train.theta", c.theta);
    c.seed = static_cast<std::uint64_t>(kv.get_int("train.seed", static_cast<long long>(c.seed)));
    c.eval_each_epoch = kv.get_bool("train.eval_each_epoch", c.eval_each_epoch);
    return c;
  }
  static TrainConfig from_config(const KeyValueConfig& kv) { return from_config(kv, TrainConfig{}); }
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;  // cumulative wall-clock time since training began
};

struct TrainResult {
  TdgcnModel model;
  std::vector<EpochLog> log;
};

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Fraction of correctly classified (already standardised) sequences.
inline double evaluate_standardized(const fingerprint::LabeledDataset& ds, const TdgcnConfig& cfg,
                                    const nn::ParamStore& ps) {
  if (ds.sequences.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : ds.sequences)
    if (argmax(forward_probs(s.data, cfg, ps).values()) == s.tx_index) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

/// Mini-batch AdamW training with seeded shuffling. The standardiser is fit
/// on `train_ds` and applied to both sets. Per-sample losses are scaled by
/// 1/batch and back-propagated in batch order, so the result is a pure
/// function of (data, config, seed).
inline TrainResult train(const fingerprint::LabeledDataset& train_ds, const TrainConfig& cfg,
                         const TdgcnConfig& arch_base = {}, const fingerprint::LabeledDataset* test_ds = nullptr,
                         const std::function<void(const EpochLog&)>& on_epoch = {}) {
  if (train_ds.sequences.empty()) throw SizeError("train: empty training set");
  train_ds.validate();
  if (cfg.batch_size == 0) throw ConfigError("train: batch size must be positive");
  TdgcnConfig arch = arch_base;
  arch.d = train_ds.d;
  arch.l = train_ds.l;
  arch.n_classes = train_ds.n_classes;
  arch.n_slots = cfg.n_slots;
  arch.pooling_ratio = cfg.pooling_ratio;
  arch.theta = cfg.theta;
  arch.validate();
  if (test_ds && (test_ds->d != arch.d || test_ds->l != arch.l || test_ds->n_classes != arch.n_classes))
    throw ShapeError("train: test set shape differs from training set");

  TrainResult result{TdgcnModel::create(arch, cfg.seed), {}};
  auto& model = result.model;
  model.standardizer = fingerprint::Standardizer::fit(train_ds);
  const auto train_std = model.standardizer.apply(train_ds);
  std::optional<fingerprint::LabeledDataset> test_std;
  if (test_ds) test_std = model.standardizer.apply(*test_ds);

  nn::AdamW opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  Rng shuffle_rng = make_rng(cfg.seed, 0x5eed);
  std::vector<std::size_t> order(train_std.size());
  std::iota(order.begin(), order.end(), 0);
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      model.params.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = train_std.sequences[order[i]];
        Tensor probs = forward_probs(s.data, arch, model.params);
        Tensor target = Tensor::constant({1, arch.n_classes}, fingerprint::one_hot(s.tx_index + 1, arch.n_classes));
        Tensor loss = nn::scale(nn::cross_entropy(probs, target), inv_b);
        nn::backward(loss);
        batch_loss += loss.item();
        if (argmax(probs.values()) == s.tx_index) ++hits;
      }
      if (!std::isfinite(batch_loss)) throw TrainingError("loss became non-finite", epoch, batch_index);
      auto grads = model.params.flat_grad();
      for (double g : grads)
        if (!std::isfinite(g)) throw TrainingError("gradient became non-finite", epoch, batch_index);
      opt.step(model.params, grads);
      loss_sum += batch_loss * static_cast<double>(end - start);
    }
    EpochLog row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.train_acc = static_cast<double>(hits) / static_cast<double>(order.size());
    if (test_std && cfg.eval_each_epoch) row.test_acc = evaluate_standardized(*test_std, arch, model.params);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  if (test_std && !cfg.eval_each_epoch && !result.log.empty())
    result.log.back().test_acc = evaluate_standardized(*test_std, arch, model.params);
  return result;
}

}  // namespace irspla::tdgcn

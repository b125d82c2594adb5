#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "irspla/baselines/decision_tree.hpp"
#include "irspla/baselines/flat.hpp"
#include "irspla/baselines/knn.hpp"
#include "irspla/baselines/naive_bayes.hpp"
#include "irspla/channel/channel_model.hpp"
#include "irspla/config.hpp"
#include "irspla/errors.hpp"
#include "irspla/eval/metrics.hpp"
#include "irspla/fingerprint/builder.hpp"
#include "irspla/random.hpp"
#include "irspla/tdgcn/train.hpp"

namespace irspla::eval {

enum class SweepAxis { Snr, Spacing, Speed, Irs };

inline std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Spacing: return "spacing";
    case SweepAxis::Speed: return "speed";
    case SweepAxis::Irs: return "irs";
  }
  return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "snr") return SweepAxis::Snr;
  if (s == "spacing") return SweepAxis::Spacing;
  if (s == "speed") return SweepAxis::Speed;
  if (s == "irs") return SweepAxis::Irs;
  throw ConfigError("unknown sweep axis '" + s + "' (expected snr, spacing, speed or irs)");
}

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"tdgcn", "knn", "dt", "nb"};
  return m;
}

struct ExperimentConfig {
  channel::ChannelConfig channel;
  tdgcn::TrainConfig train;
  tdgcn::TdgcnConfig model;
  SweepAxis axis = SweepAxis::Snr;
  std::vector<double> values{0, 10, 20, 30};
  std::vector<std::string> methods{"tdgcn", "knn", "dt", "nb"};
  std::size_t n_classes = 3;
  std::size_t per_class = 200;
  std::size_t seq_len = 50;
  double train_fraction = 0.6;
  double snr_db = 30.0;  // used when the axis is not snr
  bool noise_test_only = false;
  std::size_t knn_k = baselines::kDefaultKnnK;
  std::size_t dt_max_depth = baselines::kDefaultMaxDepth;
  std::string out_dir = "results";
  std::uint64_t seed = 1;
  bool record_wall_time = false;

  void validate() const {
    channel.validate();
    if (values.empty()) throw ConfigError("sweep.values must list at least one value");
    if (methods.empty()) throw ConfigError("experiment.methods must list at least one method");
    for (const auto& m : methods)
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
        throw ConfigError("unknown method '" + m + "'");
    if (n_classes < 2 || n_classes > channel.transmitters.size())
      throw ConfigError("experiment.n_classes must lie in [2, number of transmitters]");
    if (per_class == 0 || seq_len == 0) throw ConfigError("experiment.per_class and seq_len must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("experiment.train_fraction must be in (0,1)");
    for (double v : values) {
      if (axis == SweepAxis::Snr && std::isnan(v)) throw ConfigError("snr sweep value is NaN");
      if ((axis == SweepAxis::Spacing || axis == SweepAxis::Speed) && !(v >= 0.0 && std::isfinite(v)))
        throw ConfigError(axis_name(axis) + " sweep values must be finite and non-negative");
      if (axis == SweepAxis::Irs && v != 0.0 && v != 1.0) throw ConfigError("irs sweep values must be on/off");
    }
  }

  /// Reads `experiment.*`, `sweep.*`, `channel.*`, `tx.*`, `train.*` and
  /// `model.*` keys. Without `require_sweep` a missing axis means a single
  /// SNR point at `experiment.snr_db`.
  static ExperimentConfig from_config(const KeyValueConfig& kv, bool require_sweep = true) {
    ExperimentConfig c;
    c.channel = channel::ChannelConfig::from_config(kv);
    c.train = tdgcn::TrainConfig::from_config(kv);
    c.model = tdgcn::TdgcnConfig::from_config(kv, c.model);
    if (require_sweep && !kv.has("sweep.axis")) throw ConfigError("missing key 'sweep.axis'");
    c.axis = parse_axis(kv.get_string("sweep.axis", "snr"));
    if (kv.has("sweep.values")) {
      c.values.clear();
      for (const auto& s : kv.get_strings("sweep.values", {})) {
        if (c.axis == SweepAxis::Irs && (s == "on" || s == "off"))
          c.values.push_back(s == "on" ? 1.0 : 0.0);
        else
          c.values.push_back(KeyValueConfig::parse_double(s, "sweep.values"));
      }
    } else if (c.axis == SweepAxis::Irs) {
      c.values = {1.0, 0.0};
    } else if (c.axis != SweepAxis::Snr) {
      throw ConfigError("missing key 'sweep.values'");
    }
    const bool default_snr_values = !kv.has("sweep.values") && c.axis == SweepAxis::Snr;
    if (kv.has("experiment.methods")) c.methods = kv.get_strings("experiment.methods", {});
    c.n_classes = static_cast<std::size_t>(kv.get_int("experiment.n_classes", static_cast<long long>(c.n_classes)));
    c.per_class = static_cast<std::size_t>(kv.get_int("experiment.per_class", static_cast<long long>(c.per_class)));
    c.seq_len = static_cast<std::size_t>(kv.get_int("experiment.seq_len", static_cast<long long>(c.seq_len)));
    c.train_fraction = kv.get_double("experiment.train_fraction", c.train_fraction);
    c.snr_db = kv.get_double("experiment.snr_db", c.snr_db);
    c.noise_test_only = kv.get_bool("experiment.noise_test_only", c.noise_test_only);
    c.knn_k = static_cast<std::size_t>(kv.get_int("experiment.knn_k", static_cast<long long>(c.knn_k)));
    c.dt_max_depth =
        static_cast<std::size_t>(kv.get_int("experiment.dt_max_depth", static_cast<long long>(c.dt_max_depth)));
    c.out_dir = kv.get_string("experiment.out_dir", c.out_dir);
    c.seed = static_cast<std::uint64_t>(kv.get_int("experiment.seed", static_cast<long long>(c.seed)));
    c.record_wall_time = kv.get_bool("experiment.record_wall_time", c.record_wall_time);
    if (default_snr_values && !require_sweep) c.values = {c.snr_db};
    c.validate();
    return c;
  }
};

struct ResultRow {
  double sweep = 0.0;
  std::string method;
  double train_acc = std::numeric_limits<double>::quiet_NaN();
  double test_acc = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::size_t epochs = 0;
  std::string error;                  // empty on success
  std::vector<double> epoch_seconds;  // cumulative, TDGCN only

  bool ok() const { return error.empty(); }
};

/// Places the legitimate transmitters at `spacing` metres apart along y,
/// symmetric about their current centroid and keeping their y order.
inline void set_alice_spacing(channel::ChannelConfig& cfg, double spacing) {
  std::vector<std::size_t> idx;
  double centroid = 0.0;
  for (std::size_t i = 0; i < cfg.transmitters.size(); ++i)
    if (cfg.transmitters[i].legitimate) {
      idx.push_back(i);
      centroid += cfg.transmitters[i].position.y;
    }
  if (idx.empty()) return;
  centroid /= static_cast<double>(idx.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return cfg.transmitters[a].position.y < cfg.transmitters[b].position.y;
  });
  const double mid = 0.5 * static_cast<double>(idx.size() - 1);
  for (std::size_t r = 0; r < idx.size(); ++r)
    cfg.transmitters[idx[r]].position.y = centroid + (static_cast<double>(r) - mid) * spacing;
}

/// Scenario for one sweep point: the channel configuration and the SNR.
inline std::pair<channel::ChannelConfig, double> scenario_for(const ExperimentConfig& cfg, double value) {
  channel::ChannelConfig ch = cfg.channel;
  double snr = cfg.snr_db;
  switch (cfg.axis) {
    case SweepAxis::Snr: snr = value; break;
    case SweepAxis::Spacing: set_alice_spacing(ch, value); break;
    case SweepAxis::Speed: ch.tx_speed_mps = value; break;
    case SweepAxis::Irs: ch.irs_enabled = value != 0.0; break;
  }
  return {ch, snr};
}

/// Train/test datasets for one sweep point. All sweep points share the
/// same data and noise seeds.
inline std::pair<fingerprint::LabeledDataset, fingerprint::LabeledDataset> build_split(const ExperimentConfig& cfg,
                                                                                       double value) {
  auto [ch, snr] = scenario_for(cfg, value);
  const auto data_seed = derive_seed(cfg.seed, 1), noise_seed = derive_seed(cfg.seed, 2);
  auto ds = fingerprint::build_clean_dataset(ch, cfg.n_classes, cfg.per_class, cfg.seq_len, data_seed);
  if (!cfg.noise_test_only) ds = fingerprint::apply_noise(std::move(ds), snr, noise_seed);
  auto [train, test] = fingerprint::split_train_test(ds, cfg.train_fraction);
  if (cfg.noise_test_only) test = fingerprint::apply_noise(std::move(test), snr, noise_seed);
  return {std::move(train), std::move(test)};
}

/// Fits `method` on `train` and scores both splits. Baselines see the
/// flattened sequences after the same standardisation TDGCN uses.
inline ResultRow run_method(const ExperimentConfig& cfg, const std::string& method,
                            const fingerprint::LabeledDataset& train, const fingerprint::LabeledDataset& test) {
  ResultRow row;
  row.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  if (method == "tdgcn") {
    tdgcn::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 3);
    tc.eval_each_epoch = false;
    auto res = tdgcn::train(train, tc, cfg.model);
    const auto& m = res.model;
    row.train_acc = tdgcn::evaluate_standardized(m.standardizer.apply(train), m.config, m.params);
    row.test_acc = tdgcn::evaluate_standardized(m.standardizer.apply(test), m.config, m.params);
    row.epochs = res.log.size();
    for (const auto& e : res.log) row.epoch_seconds.push_back(e.seconds);
  } else {
    const auto st = fingerprint::Standardizer::fit(train);
    const auto ftr = baselines::flatten(st.apply(train)), fte = baselines::flatten(st.apply(test));
    std::vector<std::size_t> ptr, pte;
    if (method == "knn") {
      ptr = baselines::knn_predict_all(ftr, ftr, cfg.knn_k);
      pte = baselines::knn_predict_all(ftr, fte, cfg.knn_k);
    } else if (method == "dt") {
      const auto tree = baselines::dt_fit(ftr, cfg.dt_max_depth);
      ptr = baselines::dt_predict_all(tree, ftr);
      pte = baselines::dt_predict_all(tree, fte);
    } else if (method == "nb") {
      const auto nb = baselines::nb_fit(ftr);
      ptr = baselines::nb_predict_all(nb, ftr);
      pte = baselines::nb_predict_all(nb, fte);
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    row.train_acc = accuracy(ftr.y, ptr);
    row.test_acc = accuracy(fte.y, pte);
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Rows in sweep order, then method order. A failure in one row (dataset
/// generation or training) is recorded on that row and the sweep goes on.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg,
                                        const std::function<void(const ResultRow&)>& on_row = {}) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (double v : cfg.values) {
    std::optional<std::pair<fingerprint::LabeledDataset, fingerprint::LabeledDataset>> split;
    std::string data_error;
    try {
      split = build_split(cfg, v);
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    for (const auto& method : cfg.methods) {
      ResultRow row;
      if (split) {
        try {
          row = run_method(cfg, method, split->first, split->second);
        } catch (const std::exception& e) {
          row = ResultRow{};
          row.error = e.what();
        }
      } else {
        row.error = data_error;
      }
      row.method = method;
      row.sweep = v;
      rows.push_back(row);
      if (on_row) on_row(rows.back());
    }
  }
  return rows;
}

}  // namespace irspla::eval

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <span>
#include <map>
#include <string>
#include <vector>

#include "irspla/config.hpp"
#include "irspla/errors.hpp"
#include "irspla/fingerprint/fingerprint.hpp"
#include "irspla/nn/checkpoint.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/nn/params.hpp"
#include "irspla/random.hpp"
#include "irspla/tdgcn/gin.hpp"
#include "irspla/tdgcn/graph.hpp"
#include "irspla/tdgcn/pool.hpp"

namespace irspla::tdgcn {

/// Architecture of the temporal dynamic graph classifier.
struct TdgcnConfig {
  std::size_t d = 24;
  std::size_t l = 50;
  std::size_t n_classes = 6;
  std::size_t n_slots = 5;
  std::vector<std::size_t> tcn_channels{32, 32, 32};
  std::vector<std::size_t> tcn_kernels{9, 5, 3};
  std::vector<std::size_t> tcn_dilations{1, 2, 4};
  std::size_t gin_layers = 3;
  std::size_t gin_hidden = 32;
  double pooling_ratio = 0.2;
  double theta = 0.01;

  void validate() const {
    if (d < 2) throw ConfigError("model: need at least two fingerprint dimensions");
    if (n_classes < 1) throw ConfigError("model: need at least one class");
    if (tcn_channels.empty() || tcn_channels.size() != tcn_kernels.size() ||
        tcn_channels.size() != tcn_dilations.size())
      throw ConfigError("model: TCN channel, kernel and dilation lists must have equal non-zero length");
    for (auto k : tcn_kernels)
      if (k < 1 || l < k)
        throw ConfigError("model: sequence length " + std::to_string(l) + " shorter than TCN kernel " +
                          std::to_string(k));
    for (auto dl : tcn_dilations)
      if (dl < 1) throw ConfigError("model: dilation must be >= 1");
    if (n_slots == 0 || l % n_slots != 0)
      throw ConfigError("model: sequence length " + std::to_string(l) + " not divisible by " +
                        std::to_string(n_slots) + " slots");
    if (gin_layers < 1 || gin_hidden < 1) throw ConfigError("model: GIN layer count and width must be positive");
    if (!(pooling_ratio > 0.0 && pooling_ratio <= 1.0)) throw ConfigError("model: pooling ratio must lie in (0, 1]");
    if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("model: threshold must lie in [0, 1)");
  }

  std::map<std::string, std::string> to_metadata() const {
    auto join = [](const std::vector<std::size_t>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
      return s;
    };
    char buf[64];
    std::map<std::string, std::string> m{{"d", std::to_string(d)},
                                         {"l", std::to_string(l)},
                                         {"n_classes", std::to_string(n_classes)},
                                         {"n_slots", std::to_string(n_slots)},
                                         {"tcn_channels", join(tcn_channels)},
                                         {"tcn_kernels", join(tcn_kernels)},
                                         {"tcn_dilations", join(tcn_dilations)},
                                         {"gin_layers", std::to_string(gin_layers)},
                                         {"gin_hidden", std::to_string(gin_hidden)}};
    std::snprintf(buf, sizeof buf, "%.17g", pooling_ratio);
    m["pooling_ratio"] = buf;
    std::snprintf(buf, sizeof buf, "%.17g", theta);
    m["theta"] = buf;
    return m;
  }

  static TdgcnConfig from_metadata(const std::map<std::string, std::string>& m) {
    KeyValueConfig kv;
    for (const auto& [k, v] : m) kv.set("model." + k, v);
    return from_config(kv, {});
  }

  /// Reads `model.*` keys; unset keys keep the values of `base`.
  static TdgcnConfig from_config(const KeyValueConfig& kv, const TdgcnConfig& base) {
    TdgcnConfig c = base;
    auto sizes = [&](const std::string& key, std::vector<std::size_t> fallback) {
      if (!kv.has(key)) return fallback;
      std::vector<std::size_t> out;
      for (double v : kv.get_doubles(key, {})) out.push_back(static_cast<std::size_t>(v));
      return out;
    };
    c.d = static_cast<std::size_t>(kv.get_int("model.d", static_cast<long long>(c.d)));
    c.l = static_cast<std::size_t>(kv.get_int("model.l", static_cast<long long>(c.l)));
    c.n_classes = static_cast<std::size_t>(kv.get_int("model.n_classes", static_cast<long long>(c.n_classes)));
    c.n_slots = static_cast<std::size_t>(kv.get_int("model.n_slots", static_cast<long long>(c.n_slots)));
    c.tcn_channels = sizes("model.tcn_channels", c.tcn_channels);
    c.tcn_kernels = sizes("model.tcn_kernels", c.tcn_kernels);
    c.tcn_dilations = sizes("model.tcn_dilations", c.tcn_dilations);
    c.gin_layers = static_cast<std::size_t>(kv.get_int("model.gin_layers", static_cast<long long>(c.gin_layers)));
    c.gin_hidden = static_cast<std::size_t>(kv.get_int("model.gin_hidden", static_cast<long long>(c.gin_hidden)));
    c.pooling_ratio = kv.get_double("model.pooling_ratio", c.pooling_ratio);
    c.theta = kv.get_double("model.theta", c.theta);
    return c;
  }
};

/// Registers every learnable tensor of the network. Weights are
/// uniform(+-sqrt(1/fan_in)), biases and eps start at zero, Upsilon starts
/// at the identity so that the initial adjacency equals the similarity.
inline nn::ParamStore init_params(const TdgcnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, 0x7d6c);
  nn::ParamStore ps;
  std::vector<double> eye(cfg.d * cfg.d, 0.0);
  for (std::size_t i = 0; i < cfg.d; ++i) eye[i * cfg.d + i] = 1.0;
  ps.add("graph.upsilon", nn::Tensor::parameter({cfg.d, cfg.d}, eye));
  std::size_t cin = 1;
  for (std::size_t i = 0; i < cfg.tcn_channels.size(); ++i) {
    const auto cout = cfg.tcn_channels[i], k = cfg.tcn_kernels[i];
    ps.add("tcn." + std::to_string(i) + ".weight", nn::init_uniform({cout, cin, k}, cin * k, rng));
    ps.add("tcn." + std::to_string(i) + ".bias", nn::Tensor::zeros({cout}, true));
    cin = cout;
  }
  const std::size_t seg = cfg.l / cfg.n_slots;
  std::size_t in = cin * seg;
  std::size_t nodes = cfg.d;
  for (std::size_t layer = 0; layer < cfg.gin_layers; ++layer) {
    const std::string p = "gin." + std::to_string(layer);
    ps.add(p + ".eps", nn::Tensor::scalar(0.0, true));
    Mlp::create(ps, p, in, cfg.gin_hidden, cfg.gin_hidden, rng);
    const std::size_t clusters = cluster_count(nodes, cfg.pooling_ratio);
    ps.add("pool." + std::to_string(layer) + ".assign", nn::init_uniform({cfg.gin_hidden, clusters}, cfg.gin_hidden, rng));
    nodes = clusters;
    in = cfg.gin_hidden;
  }
  const std::size_t head_in = cfg.gin_hidden * cfg.gin_layers;
  ps.add("head.weight", nn::init_uniform({head_in, cfg.n_classes}, head_in, rng));
  ps.add("head.bias", nn::Tensor::zeros({cfg.n_classes}, true));
  return ps;
}

/// Per-dimension causal TCN stack: [d, l] -> [d, C, l].
inline Tensor tcn_forward(const Tensor& x, const TdgcnConfig& cfg, const nn::ParamStore& ps) {
  if (x.rank() != 2) throw ShapeError("tcn_forward: input must be [d, l]");
  Tensor z = nn::reshape(x, {x.dim(0), 1, x.dim(1)});
  for (std::size_t i = 0; i < cfg.tcn_channels.size(); ++i) {
    const auto& w = ps.get("tcn." + std::to_string(i) + ".weight");
    if (x.dim(1) < w.dim(2))
      throw ConfigError("tcn_forward: sequence length shorter than kernel " + std::to_string(w.dim(2)));
    z = nn::relu(nn::causal_conv1d(z, w, ps.get("tcn." + std::to_string(i) + ".bias"), cfg.tcn_dilations[i]));
  }
  return z;
}

/// Logits [1, K] for one d x l sequence (row-major values).
inline Tensor forward_logits(std::span<const double> x, const TdgcnConfig& cfg, const nn::ParamStore& ps) {
  if (x.size() != cfg.d * cfg.l)
    throw ShapeError("classify: input of " + std::to_string(x.size()) + " values, model expects d*l = " +
                     std::to_string(cfg.d) + "*" + std::to_string(cfg.l));
  Tensor input = Tensor::constant({cfg.d, cfg.l}, std::vector<double>(x.begin(), x.end()));
  Tensor feats = tcn_forward(input, cfg, ps);
  GraphInitParams gp{ps.get("graph.upsilon"), cfg.theta};
  DynGraphState st = build_dynamic_graphs(feats, x, cfg.n_slots, gp);
  std::vector<Tensor> readouts;
  for (std::size_t layer = 0; layer < cfg.gin_layers; ++layer) {
    const std::string p = "gin." + std::to_string(layer);
    DynGinParams<Mlp> gin{ps.get(p + ".eps"), Mlp::from(ps, p)};
    st = dyn_gin_layer(st, gin);
    for (auto& h : st.features) h = nn::relu(h);
    readouts.push_back(mean_readout(st));
    st = pool_state(st, ps.get("pool." + std::to_string(layer) + ".assign"), cfg.pooling_ratio);
  }
  Tensor z = nn::concat(readouts, 1);
  return nn::add_bias(nn::matmul(z, ps.get("head.weight")), ps.get("head.bias"));
}

inline Tensor forward_probs(std::span<const double> x, const TdgcnConfig& cfg, const nn::ParamStore& ps) {
  return nn::softmax(forward_logits(x, cfg, ps), 1);
}

/// Trained (or freshly initialised) network plus the input standardiser.
struct TdgcnModel {
  TdgcnConfig config;
  nn::ParamStore params;
  fingerprint::Standardizer standardizer;

  static TdgcnModel create(const TdgcnConfig& cfg, std::uint64_t seed) { return {cfg, init_params(cfg, seed), {}}; }

  /// Probability vector of length K for a raw (unstandardised) sequence.
  std::vector<double> classify(const fingerprint::FingerprintSequence& seq) const {
    if (seq.d != config.d || seq.l != config.l)
      throw ShapeError("classify: sequence " + std::to_string(seq.d) + "x" + std::to_string(seq.l) +
                       " does not match model " + std::to_string(config.d) + "x" + std::to_string(config.l));
    if (standardizer.mean.empty()) return forward_probs(seq.data, config, params).values();
    auto s = seq;
    standardizer.apply(s);
    return forward_probs(s.data, config, params).values();
  }

  std::size_t predict(const fingerprint::FingerprintSequence& seq) const {
    auto p = classify(seq);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  nn::Checkpoint to_checkpoint() const {
    nn::Checkpoint ck;
    ck.metadata = config.to_metadata();
    for (const auto& [name, t] : params.entries()) ck.tensors.emplace_back(name, t.detach());
    if (!standardizer.mean.empty()) {
      ck.tensors.emplace_back("input.mean", Tensor::constant({config.d}, standardizer.mean));
      ck.tensors.emplace_back("input.std", Tensor::constant({config.d}, standardizer.stddev));
    }
    return ck;
  }

  static TdgcnModel from_checkpoint(const nn::Checkpoint& ck) {
    TdgcnModel m;
    m.config = TdgcnConfig::from_metadata(ck.metadata);
    m.config.validate();
    auto reference = init_params(m.config, 0);
    for (const auto& [name, ref] : reference.entries()) {
      const auto& t = ck.tensor(name);
      if (t.shape() != ref.shape())
        throw FormatError("checkpoint tensor '" + name + "' has shape " + nn::shape_string(t.shape()) +
                              ", expected " + nn::shape_string(ref.shape()),
                          0);
      m.params.add(name, Tensor::parameter(t.shape(), t.values()));
    }
    for (const auto& [name, t] : ck.tensors) {
      if (name == "input.mean") m.standardizer.mean = t.values();
      if (name == "input.std") m.standardizer.stddev = t.values();
    }
    return m;
  }
};

}  // namespace irspla::tdgcn

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/params.hpp"

namespace irspla::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One AdamW update of a flat parameter block. Weight decay is decoupled:
/// theta <- theta - lr * wd * theta, then the bias-corrected Adam step.
inline void adamw_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
                       const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw ShapeError("adamw_step: gradient size does not match parameters");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ShapeError("adamw_step: optimizer state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= cfg.lr * cfg.weight_decay * params[i];
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

/// AdamW over every tensor of a ParamStore, one moment block per tensor.
class AdamW {
 public:
  explicit AdamW(AdamConfig cfg) : cfg_(cfg) {}

  /// `flat_grads` is laid out as ParamStore::flat_grad().
  void step(ParamStore& params, std::span<const double> flat_grads) {
    if (state_.empty()) state_.resize(params.size());
    if (state_.size() != params.size()) throw ShapeError("AdamW: parameter set changed between steps");
    std::size_t off = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& t = params.entries()[i].second;
      auto& v = t.mutable_values();
      if (off + v.size() > flat_grads.size()) throw ShapeError("AdamW: gradient vector too short");
      adamw_step(v, flat_grads.subspan(off, v.size()), state_[i], cfg_);
      off += v.size();
    }
    if (off != flat_grads.size()) throw ShapeError("AdamW: gradient vector too long");
  }

  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<AdamMoments> state_;
};

}  // namespace irspla::nn

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "irspla/baselines/flat.hpp"
#include "irspla/errors.hpp"

namespace irspla::baselines {

inline constexpr double kVarianceFloor = 1e-9;

struct GaussianNb {
  std::size_t dim = 0;
  std::vector<double> log_prior;
  std::vector<double> mean;  // [class, dim]
  std::vector<double> var;   // [class, dim], floored
};

/// Per-class maximum-likelihood means and variances.
inline GaussianNb nb_fit(const FlatDataset& train) {
  const std::size_t k = train.n_classes, d = train.dim;
  std::vector<std::size_t> n(k, 0);
  for (auto y : train.y) ++n[y];
  for (std::size_t c = 0; c < k; ++c)
    if (n[c] < 2)
      throw ContractError("nb_fit: class " + std::to_string(c) + " has " + std::to_string(n[c]) + " samples, need 2");
  GaussianNb m;
  m.dim = d;
  m.mean.assign(k * d, 0.0);
  m.var.assign(k * d, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = train.row(i);
    double* mu = m.mean.data() + train.y[i] * d;
    for (std::size_t j = 0; j < d; ++j) mu[j] += r[j];
  }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) m.mean[c * d + j] /= static_cast<double>(n[c]);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = train.row(i);
    const std::size_t c = train.y[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double e = r[j] - m.mean[c * d + j];
      m.var[c * d + j] += e * e;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j)
      m.var[c * d + j] = std::max(m.var[c * d + j] / static_cast<double>(n[c]), kVarianceFloor);
    m.log_prior.push_back(std::log(static_cast<double>(n[c]) / static_cast<double>(train.size())));
  }
  return m;
}

inline std::vector<double> nb_log_posterior(const GaussianNb& m, std::span<const double> query) {
  if (query.size() != m.dim) throw ShapeError("nb_predict: query length does not match training dimension");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  std::vector<double> out(m.log_prior.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = m.log_prior[c];
    for (std::size_t j = 0; j < m.dim; ++j) {
      const double v = m.var[c * m.dim + j], e = query[j] - m.mean[c * m.dim + j];
      s -= 0.5 * (log2pi + std::log(v) + e * e / v);
    }
    out[c] = s;
  }
  return out;
}

inline std::size_t nb_predict(const GaussianNb& m, std::span<const double> query) {
  const auto lp = nb_log_posterior(m, query);
  std::size_t best = 0;
  for (std::size_t c = 1; c < lp.size(); ++c)
    if (lp[c] > lp[best]) best = c;
  return best;
}

inline std::vector<std::size_t> nb_predict_all(const GaussianNb& m, const FlatDataset& queries) {
  std::vector<std::size_t> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = nb_predict(m, queries.row(i));
  return out;
}

}  // namespace irspla::baselines

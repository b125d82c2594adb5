#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/nn/tensor.hpp"

namespace irspla::tdgcn {

using nn::Tensor;

/// Row-softmax of negative Euclidean distances between the d rows of a
/// d x l row-major block (rows of `stride` values, columns [begin, end)).
inline std::vector<double> similarity_values(std::span<const double> x, std::size_t d, std::size_t stride,
                                             std::size_t begin, std::size_t end) {
  if (d < 1) throw ShapeError("similarity_matrix: need at least one row");
  if (end > stride || begin > end || x.size() < d * stride) throw ShapeError("similarity_matrix: bad column range");
  std::vector<double> dist(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      double s = 0.0;
      for (std::size_t t = begin; t < end; ++t) {
        const double diff = x[i * stride + t] - x[j * stride + t];
        s += diff * diff;
      }
      dist[i * d + j] = dist[j * d + i] = std::sqrt(s);
    }
  std::vector<double> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    // exp(-relu(dist)); distances are non-negative, and the self term is
    // exp(0) = 1, so the row minimum is always 0 and no max-shift is needed.
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += out[i * d + j] = std::exp(-std::max(0.0, dist[i * d + j]));
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] /= z;
  }
  return out;
}

/// S for a full d x l series. Constant w.r.t. differentiation.
inline Tensor similarity_matrix(std::span<const double> x, std::size_t d, std::size_t l) {
  return Tensor::constant({d, d}, similarity_values(x, d, l, 0, l));
}

struct GraphInitParams {
  Tensor upsilon;  // d x d, learnable
  double theta = 0.0;
};

/// A = ReLU(S * Upsilon), entries below theta set to exactly zero.
inline Tensor adjacency(const Tensor& s, const GraphInitParams& p) {
  if (p.theta < 0.0) throw DomainError("adjacency: threshold must be non-negative");
  return nn::threshold(nn::relu(nn::matmul(s, p.upsilon)), p.theta);
}

/// Node features, adjacency and normalised edge weights for every time slot.
struct DynGraphState {
  std::vector<Tensor> features;   // per slot: [nodes, F]
  std::vector<Tensor> adjacency;  // per slot: [nodes, nodes]
  std::vector<Tensor> weights;    // per slot: row-normalised adjacency

  std::size_t slots() const { return features.size(); }
  std::size_t nodes() const { return features.empty() ? 0 : features.front().dim(0); }
};

inline DynGraphState make_state(std::vector<Tensor> features, std::vector<Tensor> adjacency) {
  if (features.size() != adjacency.size() || features.empty())
    throw ShapeError("dynamic graph: feature and adjacency slot counts differ");
  DynGraphState st;
  for (std::size_t n = 0; n < features.size(); ++n) {
    const auto nodes = features[n].dim(0);
    if (adjacency[n].rank() != 2 || adjacency[n].dim(0) != nodes || adjacency[n].dim(1) != nodes)
      throw ShapeError("dynamic graph: adjacency " + nn::shape_string(adjacency[n].shape()) + " for " +
                       std::to_string(nodes) + " nodes");
    st.weights.push_back(nn::row_normalize(adjacency[n]));
  }
  st.features = std::move(features);
  st.adjacency = std::move(adjacency);
  return st;
}

/// Splits TCN features [d, C, l] and the raw series (d x l row-major) into
/// n_slots equal segments. Slot n gets node features [d, C * l/n_slots] and
/// an adjacency built from that segment of the raw series. The cross-slot
/// edges are implicit: dyn_gin_layer adds node v's previous-slot embedding.
inline DynGraphState build_dynamic_graphs(const Tensor& features, std::span<const double> raw, std::size_t n_slots,
                                          const GraphInitParams& params) {
  if (features.rank() != 3) throw ShapeError("build_dynamic_graphs: features must be [d, C, l]");
  const std::size_t d = features.dim(0), c = features.dim(1), l = features.dim(2);
  if (n_slots == 0 || l % n_slots != 0)
    throw ConfigError("build_dynamic_graphs: sequence length " + std::to_string(l) + " not divisible by " +
                      std::to_string(n_slots) + " slots");
  if (raw.size() != d * l) throw ShapeError("build_dynamic_graphs: raw series does not match features");
  const std::size_t seg = l / n_slots;
  std::vector<Tensor> feats, adj;
  for (std::size_t n = 0; n < n_slots; ++n) {
    feats.push_back(nn::reshape(nn::slice_last(features, n * seg, (n + 1) * seg), {d, c * seg}));
    Tensor s = Tensor::constant({d, d}, similarity_values(raw, d, l, n * seg, (n + 1) * seg));
    adj.push_back(adjacency(s, params));
  }
  return make_state(std::move(feats), std::move(adj));
}

}  // namespace irspla::tdgcn

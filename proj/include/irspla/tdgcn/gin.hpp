#pragma once

#include <string>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/nn/params.hpp"
#include "irspla/tdgcn/graph.hpp"

namespace irspla::tdgcn {

/// Two linear layers with a ReLU between them.
struct Mlp {
  Tensor w1, b1, w2, b2;

  Tensor operator()(const Tensor& h) const {
    return nn::add_bias(nn::matmul(nn::relu(nn::add_bias(nn::matmul(h, w1), b1)), w2), b2);
  }

  static Mlp create(nn::ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                    std::size_t out, Rng& rng) {
    Mlp m;
    m.w1 = store.add(prefix + ".w1", nn::init_uniform({in, hidden}, in, rng));
    m.b1 = store.add(prefix + ".b1", nn::Tensor::zeros({hidden}, true));
    m.w2 = store.add(prefix + ".w2", nn::init_uniform({hidden, out}, hidden, rng));
    m.b2 = store.add(prefix + ".b2", nn::Tensor::zeros({out}, true));
    return m;
  }

  static Mlp from(const nn::ParamStore& store, const std::string& prefix) {
    return {store.get(prefix + ".w1"), store.get(prefix + ".b1"), store.get(prefix + ".w2"), store.get(prefix + ".b2")};
  }
};

struct IdentityMlp {
  Tensor operator()(const Tensor& h) const { return h; }
};

/// Static GIN update with weighted sum aggregation,
/// H'_v = MLP((1 + eps) H_v + sum_u A_vu H_u), evaluated with explicit
/// neighbour loops. Used as the reference for the dynamic layer.
template <class MlpT>
Tensor gin_layer_static(const Tensor& adj, const Tensor& h, double eps, const MlpT& mlp) {
  if (h.rank() != 2) throw ShapeError("gin_layer_static: features must be rank 2");
  const std::size_t n = h.dim(0), f = h.dim(1);
  if (adj.rank() != 2 || adj.dim(0) != n || adj.dim(1) != n)
    throw ShapeError("gin_layer_static: adjacency " + nn::shape_string(adj.shape()) + " for features " +
                     nn::shape_string(h.shape()));
  std::vector<double> agg(n * f);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < f; ++k) agg[v * f + k] = (1.0 + eps) * h.values()[v * f + k];
    for (std::size_t u = 0; u < n; ++u) {
      const double w = adj.values()[v * n + u];
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < f; ++k) agg[v * f + k] += w * h.values()[u * f + k];
    }
  }
  return mlp(Tensor::constant({n, f}, std::move(agg)));
}

template <class MlpT>
struct DynGinParams {
  Tensor eps;  // one-element, learnable
  MlpT mlp;
};

/// One dynamic GIN layer over all slots:
/// H^(n) <- MLP((1 + eps) H^(n) + H^(n-1) + W~^(n) H^(n)), no previous-slot
/// term for the first slot. Adjacency and weights carry over unchanged.
template <class MlpT>
DynGraphState dyn_gin_layer(const DynGraphState& st, const DynGinParams<MlpT>& p) {
  if (st.slots() == 0) throw ShapeError("dyn_gin_layer: state has no slots");
  DynGraphState out;
  out.adjacency = st.adjacency;
  out.weights = st.weights;
  for (std::size_t n = 0; n < st.slots(); ++n) {
    const Tensor& h = st.features[n];
    std::vector<Tensor> terms{h, nn::mul_scalar(h, p.eps), nn::matmul(st.weights[n], h)};
    if (n > 0) {
      if (st.features[n - 1].shape() != h.shape())
        throw ShapeError("dyn_gin_layer: slot feature shapes differ");
      terms.push_back(st.features[n - 1]);
    }
    out.features.push_back(p.mlp(nn::add_n(terms)));
  }
  return out;
}

/// Per-layer readout: slot summaries (node means) concatenated in ascending
/// slot order, [1, slots * F].
inline Tensor slot_readout(const DynGraphState& st) {
  std::vector<Tensor> parts;
  for (const auto& h : st.features) parts.push_back(nn::mean(h, 0));
  return nn::concat(parts, 1);
}

/// Average over nodes and slots, [1, F].
inline Tensor mean_readout(const DynGraphState& st) {
  std::vector<Tensor> parts;
  for (const auto& h : st.features) parts.push_back(nn::mean(h, 0));
  return nn::scale(nn::add_n(parts), 1.0 / static_cast<double>(parts.size()));
}

}  // namespace irspla::tdgcn

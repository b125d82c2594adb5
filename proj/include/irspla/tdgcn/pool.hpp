#pragma once

#include <cmath>

#include "irspla/errors.hpp"
#include "irspla/nn/ops.hpp"
#include "irspla/tdgcn/graph.hpp"

namespace irspla::tdgcn {

/// max(1, ceil(ratio * nodes)).
inline std::size_t cluster_count(std::size_t nodes, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("pooling ratio must lie in (0, 1]");
  const auto c = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(nodes) - 1e-9));
  return std::max<std::size_t>(1, c);
}

struct PooledGraph {
  Tensor features;    // [clusters, F]
  Tensor adjacency;   // [clusters, clusters]
  Tensor assignment;  // [nodes, clusters]
};

/// Graph coarsening for a given assignment: H' = C^T H, A' = C^T A C.
inline PooledGraph coarsen(const Tensor& h, const Tensor& a, const Tensor& c) {
  if (c.rank() != 2 || c.dim(0) != h.dim(0))
    throw ShapeError("coarsen: assignment " + nn::shape_string(c.shape()) + " for features " +
                     nn::shape_string(h.shape()));
  const Tensor ct = nn::transpose(c);
  return {nn::matmul(ct, h), nn::matmul(nn::matmul(ct, a), c), c};
}

/// Soft cluster assignment C = row-softmax(H W) followed by coarsening.
/// W is [F, clusters] with clusters = cluster_count(nodes, ratio).
inline PooledGraph cluster_pool(const Tensor& h, const Tensor& a, const Tensor& assign_weights, double ratio) {
  const std::size_t k = cluster_count(h.dim(0), ratio);
  if (assign_weights.rank() != 2 || assign_weights.dim(0) != h.dim(1) || assign_weights.dim(1) != k)
    throw ShapeError("cluster_pool: assignment weights " + nn::shape_string(assign_weights.shape()) +
                     " for features " + nn::shape_string(h.shape()) + " and " + std::to_string(k) + " clusters");
  return coarsen(h, a, nn::softmax(nn::matmul(h, assign_weights), 1));
}

/// Pools every slot of a state with shared assignment weights.
inline DynGraphState pool_state(const DynGraphState& st, const Tensor& assign_weights, double ratio) {
  std::vector<Tensor> feats, adj;
  for (std::size_t n = 0; n < st.slots(); ++n) {
    auto p = cluster_pool(st.features[n], st.adjacency[n], assign_weights, ratio);
    feats.push_back(p.features);
    adj.push_back(p.adjacency);
  }
  return make_state(std::move(feats), std::move(adj));
}

}  // namespace irspla::tdgcn

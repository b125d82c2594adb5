#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "irspla/baselines/flat.hpp"
#include "irspla/errors.hpp"

namespace irspla::baselines {

inline constexpr std::size_t kDefaultKnnK = 5;

/// Majority vote among the k Euclidean-nearest training samples. Equal
/// distances are ordered by training index. Vote ties go to the label with
/// the smallest summed distance, then to the lowest label.
inline std::size_t knn_predict(const FlatDataset& train, std::span<const double> query, std::size_t k = kDefaultKnnK) {
  if (train.size() == 0) throw ContractError("knn_predict: empty training set");
  if (k < 1 || k > train.size())
    throw ContractError("knn_predict: k=" + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
  if (query.size() != train.dim) throw ShapeError("knn_predict: query length does not match training dimension");

  std::vector<double> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = train.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < train.dim; ++j) {
      const double diff = r[j] - query[j];
      s += diff * diff;
    }
    dist[i] = std::sqrt(s);
  }
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);

  std::vector<std::size_t> votes(train.n_classes, 0);
  std::vector<double> total(train.n_classes, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    votes[train.y[idx[i]]] += 1;
    total[train.y[idx[i]]] += dist[idx[i]];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && total[c] < total[best])) best = c;
  return best;
}

inline std::vector<std::size_t> knn_predict_all(const FlatDataset& train, const FlatDataset& queries,
                                                std::size_t k = kDefaultKnnK) {
  std::vector<std::size_t> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = knn_predict(train, queries.row(i), k);
  return out;
}

}  // namespace irspla::baselines

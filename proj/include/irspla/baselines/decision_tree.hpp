#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "irspla/baselines/flat.hpp"
#include "irspla/errors.hpp"

namespace irspla::baselines {

inline constexpr std::size_t kDefaultMaxDepth = 12;

/// Binary CART tree. Internal nodes send x[feature] <= threshold left.
struct DecisionTree {
  struct Node {
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int64_t left = -1;  // -1 marks a leaf
    std::int64_t right = -1;
    std::size_t label = 0;
  };
  std::vector<Node> nodes;
  std::size_t dim = 0;

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::int64_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [n, dep] = stack.back();
      stack.pop_back();
      best = std::max(best, dep);
      if (nodes[n].left >= 0) {
        stack.push_back({nodes[n].left, dep + 1});
        stack.push_back({nodes[n].right, dep + 1});
      }
    }
    return best;
  }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.left < 0; }));
  }
};

namespace detail {

inline double gini(const std::vector<std::size_t>& counts, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    s += p * p;
  }
  return 1.0 - s;
}

inline std::size_t majority(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

inline Split best_split(const FlatDataset& data, const std::vector<std::size_t>& rows, double parent_impurity) {
  const std::size_t n = rows.size(), k = data.n_classes;
  Split best;
  std::vector<std::pair<double, std::size_t>> col(n);
  std::vector<std::size_t> left(k), right(k);
  for (std::size_t f = 0; f < data.dim; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = {data.x[rows[i] * data.dim + f], data.y[rows[i]]};
    std::sort(col.begin(), col.end());
    if (col.front().first == col.back().first) continue;
    std::fill(left.begin(), left.end(), 0);
    std::fill(right.begin(), right.end(), 0);
    for (const auto& [v, y] : col) ++right[y];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[col[i].second];
      --right[col[i].second];
      if (col[i].first == col[i + 1].first) continue;
      const std::size_t nl = i + 1, nr = n - nl;
      const double imp =
          (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) / static_cast<double>(n);
      if (imp < best.impurity) {
        best = {true, f, 0.5 * (col[i].first + col[i + 1].first), imp};
      }
    }
  }
  // A split that leaves impurity unchanged only adds depth.
  if (best.found && !(best.impurity < parent_impurity - 1e-12)) best.found = false;
  return best;
}

}  // namespace detail

/// Greedy CART fit with Gini impurity and midpoint thresholds. Leaves
/// predict the majority class (lowest label on ties). max_depth 0 yields a
/// single majority leaf.
inline DecisionTree dt_fit(const FlatDataset& train, std::size_t max_depth = kDefaultMaxDepth) {
  if (train.size() == 0) throw ContractError("dt_fit: empty training set");
  DecisionTree tree;
  tree.dim = train.dim;
  struct Work {
    std::int64_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), 0);
  tree.nodes.push_back({});
  std::vector<Work> stack;
  stack.push_back({0, std::move(all), 0});
  std::vector<std::size_t> counts(train.n_classes);
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    std::fill(counts.begin(), counts.end(), 0);
    for (auto r : w.rows) ++counts[train.y[r]];
    tree.nodes[w.node].label = detail::majority(counts);
    const double imp = detail::gini(counts, w.rows.size());
    if (w.depth >= max_depth || imp == 0.0) continue;
    const auto split = detail::best_split(train, w.rows, imp);
    if (!split.found) continue;
    std::vector<std::size_t> l, r;
    for (auto i : w.rows) (train.x[i * train.dim + split.feature] <= split.threshold ? l : r).push_back(i);
    const auto li = static_cast<std::int64_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    auto& node = tree.nodes[w.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = li;
    node.right = li + 1;
    stack.push_back({li + 1, std::move(r), w.depth + 1});
    stack.push_back({li, std::move(l), w.depth + 1});
  }
  return tree;
}

inline std::size_t dt_predict(const DecisionTree& tree, std::span<const double> query) {
  if (query.size() != tree.dim) throw ShapeError("dt_predict: query length does not match training dimension");
  std::int64_t n = 0;
  while (tree.nodes[n].left >= 0)
    n = query[tree.nodes[n].feature] <= tree.nodes[n].threshold ? tree.nodes[n].left : tree.nodes[n].right;
  return tree.nodes[n].label;
}

inline std::vector<std::size_t> dt_predict_all(const DecisionTree& tree, const FlatDataset& queries) {
  std::vector<std::size_t> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = dt_predict(tree, queries.row(i));
  return out;
}

}  // namespace irspla::baselines

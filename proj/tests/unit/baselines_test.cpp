#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "irspla/baselines/decision_tree.hpp"
#include "irspla/baselines/knn.hpp"
#include "irspla/baselines/naive_bayes.hpp"
#include "irspla/random.hpp"

using namespace irspla;
using namespace irspla::baselines;

namespace {

FlatDataset make(std::size_t dim, const std::vector<std::vector<double>>& rows, const std::vector<std::size_t>& y) {
  FlatDataset d;
  d.dim = dim;
  for (std::size_t i = 0; i < rows.size(); ++i) d.push(rows[i], y[i]);
  return d;
}

// Gaussian blobs centred at label * spread along every axis.
FlatDataset blobs(std::size_t n, std::size_t dim, std::size_t k, double spread, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  FlatDataset d;
  d.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % k;
    std::vector<double> v(dim);
    for (auto& x : v) x = spread * static_cast<double>(label) + g(rng);
    d.push(v, label);
  }
  return d;
}

// Full sort of every training sample, majority vote with ties going to the
// label whose members are closer in total, then to the smaller label.
std::size_t knn_oracle(const FlatDataset& train, std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < train.dim; ++j) s += (train.row(i)[j] - q[j]) * (train.row(i)[j] - q[j]);
    all.emplace_back(std::sqrt(s), i);
  }
  std::sort(all.begin(), all.end());
  std::map<std::size_t, std::pair<std::size_t, double>> votes;
  for (std::size_t i = 0; i < k; ++i) {
    auto& v = votes[train.y[all[i].second]];
    ++v.first;
    v.second += all[i].first;
  }
  std::size_t best = votes.begin()->first;
  for (const auto& [label, v] : votes) {
    const auto& b = votes[best];
    if (v.first > b.first || (v.first == b.first && v.second < b.second)) best = label;
  }
  return best;
}

double train_accuracy(const DecisionTree& t, const FlatDataset& d) {
  const auto p = dt_predict_all(t, d);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i) hits += p[i] == d.y[i];
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace

TEST(Knn, ExactMatchWithSingleNeighbour) {
  auto d = make(2, {{0, 0}, {5, 5}, {9, 1}}, {0, 1, 2});
  EXPECT_EQ(knn_predict(d, std::vector<double>{9, 1}, 1), 2u);
  EXPECT_EQ(knn_predict(d, std::vector<double>{4.9, 5.2}, 1), 1u);
}

TEST(Knn, MajorityOfThree) {
  auto d = make(1, {{0.0}, {0.1}, {0.2}, {10.0}}, {1, 1, 2, 2});
  EXPECT_EQ(knn_predict(d, std::vector<double>{0.05}, 3), 1u);
}

TEST(Knn, TiedVoteGoesToCloserClass) {
  auto d = make(1, {{-1.0}, {2.0}}, {3, 0});
  EXPECT_EQ(knn_predict(d, std::vector<double>{0.0}, 2), 3u);
}

TEST(Knn, KBeyondTrainingSetIsContractError) {
  auto d = make(1, {{0.0}, {1.0}}, {0, 1});
  EXPECT_THROW(knn_predict(d, std::vector<double>{0.0}, 3), ContractError);
  EXPECT_THROW(knn_predict(d, std::vector<double>{0.0}, 0), ContractError);
}

TEST(Knn, EmptyTrainingSetIsContractError) {
  FlatDataset d;
  d.dim = 1;
  EXPECT_THROW(knn_predict(d, std::vector<double>{0.0}, 1), ContractError);
}

TEST(Knn, DimensionMismatchIsShapeError) {
  auto d = make(2, {{0, 0}}, {0});
  EXPECT_THROW(knn_predict(d, std::vector<double>{0.0}, 1), ShapeError);
}

TEST(Knn, AgreesWithFullSortOracle) {
  auto train = blobs(200, 6, 3, 0.8, 1);
  auto queries = blobs(200, 6, 3, 0.8, 2);
  for (std::size_t k : {1u, 3u, 5u, 8u}) {
    const auto pred = knn_predict_all(train, queries, k);
    for (std::size_t i = 0; i < queries.size(); ++i)
      EXPECT_EQ(pred[i], knn_oracle(train, queries.row(i), k)) << "k=" << k << " query " << i;
  }
}

TEST(DecisionTree, SingleClassIsOneLeaf) {
  auto d = make(2, {{0, 1}, {3, 4}, {5, 6}}, {2, 2, 2});
  auto t = dt_fit(d);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.depth(), 0u);
  EXPECT_EQ(dt_predict(t, std::vector<double>{100, -100}), 2u);
}

TEST(DecisionTree, OneDimensionalThreshold) {
  auto d = make(1, {{1.0}, {2.0}, {3.0}, {10.0}, {11.0}}, {0, 0, 0, 1, 1});
  auto t = dt_fit(d);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.nodes[0].threshold, 6.5);
  EXPECT_EQ(dt_predict(t, std::vector<double>{6.5}), 0u);
  EXPECT_EQ(dt_predict(t, std::vector<double>{6.6}), 1u);
  EXPECT_EQ(train_accuracy(t, d), 1.0);
}

TEST(DecisionTree, FourPointPerfectSplit) {
  auto d = make(1, {{0.0}, {1.0}, {10.0}, {11.0}}, {0, 0, 1, 1});
  auto t = dt_fit(d);
  EXPECT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.nodes[0].threshold, 5.5);
  EXPECT_EQ(train_accuracy(t, d), 1.0);
}

TEST(DecisionTree, ZeroDepthIsMajorityStump) {
  auto d = make(1, {{1.0}, {2.0}, {3.0}, {4.0}}, {1, 0, 1, 2});
  auto t = dt_fit(d, 0);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(dt_predict(t, std::vector<double>{2.0}), 1u);
}

TEST(DecisionTree, MajorityTieGoesToLowerLabel) {
  auto d = make(1, {{1.0}, {2.0}}, {4, 3});
  EXPECT_EQ(dt_predict(dt_fit(d, 0), std::vector<double>{0.0}), 3u);
}

TEST(DecisionTree, DeeperTreesFitAtLeastAsWell) {
  auto d = blobs(300, 4, 3, 0.7, 3);
  double prev = 0.0;
  for (std::size_t depth = 0; depth <= 12; ++depth) {
    auto t = dt_fit(d, depth);
    EXPECT_LE(t.depth(), depth);
    const double acc = train_accuracy(t, d);
    EXPECT_GE(acc, prev) << "depth " << depth;
    prev = acc;
  }
}

TEST(DecisionTree, XorNeedsTwoLevels) {
  auto d = make(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 0.1}, {1, 0.9}}, {0, 1, 1, 0, 0, 0});
  auto t = dt_fit(d);
  EXPECT_EQ(train_accuracy(t, d), 1.0);
}

TEST(DecisionTree, EmptySetIsContractError) {
  FlatDataset d;
  d.dim = 1;
  EXPECT_THROW(dt_fit(d), ContractError);
}

TEST(NaiveBayes, SymmetricQueryTiesToLowerLabel) {
  auto d = make(1, {{-1.0}, {-3.0}, {1.0}, {3.0}}, {1, 1, 0, 0});
  auto m = nb_fit(d);
  EXPECT_EQ(nb_predict(m, std::vector<double>{0.0}), 0u);
  EXPECT_EQ(nb_predict(m, std::vector<double>{-0.5}), 1u);
}

TEST(NaiveBayes, IdenticalClassesGiveUniformPosterior) {
  auto d = make(2, {{1, 5}, {3, 2}, {1, 5}, {3, 2}, {1, 5}, {3, 2}}, {0, 0, 1, 1, 2, 2});
  auto m = nb_fit(d);
  const auto post = nb_log_posterior(m, std::vector<double>{2.2, 4.0});
  EXPECT_EQ(post[0], post[1]);
  EXPECT_EQ(post[1], post[2]);
  EXPECT_EQ(nb_predict(m, std::vector<double>{2.2, 4.0}), 0u);
}

TEST(NaiveBayes, QueriesBeyondMidpointGoToNearerClass) {
  // equal variances and priors put the boundary at the midpoint 5
  auto d = make(1, {{-1.0}, {0.0}, {1.0}, {9.0}, {10.0}, {11.0}}, {0, 0, 0, 1, 1, 1});
  auto m = nb_fit(d);
  for (double q : {-20.0, 0.0, 4.9}) EXPECT_EQ(nb_predict(m, std::vector<double>{q}), 0u) << q;
  for (double q : {5.1, 10.0, 30.0}) EXPECT_EQ(nb_predict(m, std::vector<double>{q}), 1u) << q;
}

TEST(NaiveBayes, MatchesClosedFormPosterior) {
  auto d = make(1, {{0.0}, {2.0}, {10.0}, {14.0}, {12.0}}, {0, 0, 1, 1, 1});
  auto m = nb_fit(d);
  // class 0: mean 1, var 1; class 1: mean 12, var 8/3
  const double x = 4.0;
  auto lp = [](double prior, double mu, double var, double x) {
    return std::log(prior) - 0.5 * std::log(2.0 * std::numbers::pi * var) - (x - mu) * (x - mu) / (2.0 * var);
  };
  const auto post = nb_log_posterior(m, std::vector<double>{x});
  EXPECT_NEAR(post[0], lp(0.4, 1.0, 1.0, x), 1e-12);
  EXPECT_NEAR(post[1], lp(0.6, 12.0, 8.0 / 3.0, x), 1e-12);
}

TEST(NaiveBayes, SeparatesDistantGaussians) {
  auto train = blobs(300, 5, 3, 4.0, 4), test = blobs(300, 5, 3, 4.0, 5);
  auto m = nb_fit(train);
  const auto p = nb_predict_all(m, test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hits += p[i] == test.y[i];
  EXPECT_GE(hits, 290u);
}

TEST(NaiveBayes, ConstantFeatureUsesVarianceFloor) {
  auto d = make(2, {{1.0, 0.0}, {1.0, 1.0}, {1.0, 5.0}, {1.0, 6.0}}, {0, 0, 1, 1});
  auto m = nb_fit(d);
  EXPECT_EQ(m.var[0], kVarianceFloor);
  for (double v : nb_log_posterior(m, std::vector<double>{1.0, 0.5})) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(nb_predict(m, std::vector<double>{1.0, 0.5}), 0u);
}

TEST(NaiveBayes, AffineRescalingKeepsPredictions) {
  auto train = blobs(120, 3, 3, 1.0, 6), test = blobs(90, 3, 3, 1.0, 7);
  const std::vector<double> a{3.0, 0.01, 250.0}, b{-7.0, 2.0, 1e3};
  auto rescale = [&](FlatDataset d) {
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < d.dim; ++j) d.x[i * d.dim + j] = a[j] * d.x[i * d.dim + j] + b[j];
    return d;
  };
  EXPECT_EQ(nb_predict_all(nb_fit(train), test), nb_predict_all(nb_fit(rescale(train)), rescale(test)));
}

TEST(NaiveBayes, ClassWithOneSampleIsContractError) {
  auto d = make(1, {{0.0}, {1.0}, {2.0}}, {0, 0, 1});
  EXPECT_THROW(nb_fit(d), ContractError);
}

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "irspla/errors.hpp"

namespace irspla::eval {

/// Fraction of positions where predicted == actual.
inline double accuracy(std::span<const std::size_t> actual, std::span<const std::size_t> predicted) {
  if (actual.size() != predicted.size())
    throw ContractError("accuracy: " + std::to_string(actual.size()) + " labels vs " +
                        std::to_string(predicted.size()) + " predictions");
  if (actual.empty()) throw ContractError("accuracy: no labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) hits += actual[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(actual.size());
}

/// K x K counts; entry (i, j) counts samples of class i predicted as j.
/// Labels are 0-based.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;

  std::size_t operator()(std::size_t i, std::size_t j) const { return counts[i * k + j]; }
  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < k; ++i) s += counts[i * k + i];
    return s;
  }
  std::size_t row_sum(std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k; ++j) s += counts[i * k + j];
    return s;
  }
  double accuracy() const { return static_cast<double>(trace()) / static_cast<double>(total()); }
};

inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                        std::size_t k) {
  if (actual.size() != predicted.size()) throw ContractError("confusion_matrix: length mismatch");
  ConfusionMatrix m{k, std::vector<std::size_t>(k * k, 0)};
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= k || predicted[i] >= k)
      throw ContractError("confusion_matrix: label outside [0, " + std::to_string(k) + ") at position " +
                          std::to_string(i));
    ++m.counts[actual[i] * k + predicted[i]];
  }
  return m;
}

}  // namespace irspla::eval

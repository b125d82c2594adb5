#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "irspla/channel/complex_matrix.hpp"
#include "irspla/errors.hpp"
#include "irspla/random.hpp"

namespace irspla::fingerprint {

using channel::ComplexMatrix;

/// One authentication sample: d x l real matrix stored row-major, so row i
/// is the time series of fingerprint dimension i.
struct FingerprintSequence {
  std::size_t d = 0;
  std::size_t l = 0;
  std::vector<double> data;
  std::uint32_t tx_index = 0;
  std::uint32_t slot_index = 0;

  double at(std::size_t dim, std::size_t t) const { return data[dim * l + t]; }
  double& at(std::size_t dim, std::size_t t) { return data[dim * l + t]; }
  std::span<const double> row(std::size_t dim) const { return {data.data() + dim * l, l}; }

  bool operator==(const FingerprintSequence&) const = default;
};

/// Real parts (row-major) followed by imaginary parts (row-major).
inline std::vector<double> flatten_csi(const ComplexMatrix& x) {
  std::vector<double> out(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x.data()[i].real();
    out[x.size() + i] = x.data()[i].imag();
  }
  return out;
}

inline ComplexMatrix unflatten_csi(std::span<const double> v, std::size_t rows, std::size_t cols) {
  if (v.size() != 2 * rows * cols) throw ShapeError("unflatten_csi: vector length does not match 2*rows*cols");
  ComplexMatrix x(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) x.data()[i] = {v[i], v[rows * cols + i]};
  return x;
}

/// Cuts a sample stream into consecutive disjoint windows of length l and
/// transposes each window to d x l.
inline std::vector<FingerprintSequence> segment_sequences(const std::vector<std::vector<double>>& samples,
                                                          std::size_t l, std::uint32_t tx_index = 0) {
  if (l == 0) throw SizeError("segment_sequences: window length must be positive");
  if (samples.size() % l != 0)
    throw SizeError("segment_sequences: " + std::to_string(samples.size()) + " samples not divisible by l=" +
                    std::to_string(l));
  std::vector<FingerprintSequence> out;
  if (samples.empty()) return out;
  const std::size_t d = samples.front().size();
  out.reserve(samples.size() / l);
  for (std::size_t s = 0; s < samples.size() / l; ++s) {
    FingerprintSequence seq{d, l, std::vector<double>(d * l), tx_index, static_cast<std::uint32_t>(s)};
    for (std::size_t t = 0; t < l; ++t) {
      const auto& v = samples[s * l + t];
      if (v.size() != d) throw SizeError("segment_sequences: inconsistent sample dimension");
      for (std::size_t i = 0; i < d; ++i) seq.at(i, t) = v[i];
    }
    out.push_back(std::move(seq));
  }
  return out;
}

/// One-hot label for class `k` counted from 1, as in "transmitter 1..K".
/// Stored labels (tx_index) are zero-based; see one_hot_label.
inline std::vector<double> one_hot(std::size_t k, std::size_t n_classes) {
  if (k < 1 || k > n_classes)
    throw IndexError("one_hot: class " + std::to_string(k) + " outside [1, " + std::to_string(n_classes) + "]");
  std::vector<double> v(n_classes, 0.0);
  v[k - 1] = 1.0;
  return v;
}

/// Sequences grouped in class blocks (transmitter, then slot ascending).
struct LabeledDataset {
  std::size_t n_classes = 0;
  std::size_t d = 0;
  std::size_t l = 0;
  std::vector<FingerprintSequence> sequences;

  std::size_t size() const { return sequences.size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(n_classes, 0);
    for (const auto& s : sequences) ++counts.at(s.tx_index);
    return counts;
  }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences) out.push_back(s.tx_index);
    return out;
  }

  std::vector<double> one_hot_label(std::size_t i) const { return one_hot(sequences.at(i).tx_index + 1, n_classes); }

  /// Restores the block ordering invariant.
  void sort_blocks() {
    std::stable_sort(sequences.begin(), sequences.end(), [](const auto& a, const auto& b) {
      return std::pair(a.tx_index, a.slot_index) < std::pair(b.tx_index, b.slot_index);
    });
  }

  void validate() const {
    for (const auto& s : sequences) {
      if (s.d != d || s.l != l || s.data.size() != d * l) throw ShapeError("dataset: sequence shape mismatch");
      if (s.tx_index >= n_classes) throw IndexError("dataset: class index out of range");
      for (double v : s.data)
        if (!std::isfinite(v)) throw DomainError("dataset: non-finite fingerprint entry");
    }
  }

  bool operator==(const LabeledDataset&) const = default;
};

/// Per-class split. Temporal mode gives each class's earliest
/// floor(fraction * N_k) slots to train; random mode shuffles slots per
/// class first (seeded).
inline std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& ds, double train_fraction,
                                                                  bool random = false, std::uint64_t seed = 0) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("split_train_test: fraction must lie in (0, 1)");
  LabeledDataset train{ds.n_classes, ds.d, ds.l, {}};
  LabeledDataset test{ds.n_classes, ds.d, ds.l, {}};
  Rng rng = make_rng(seed, 0x5b1173);
  for (std::size_t k = 0; k < ds.n_classes; ++k) {
    std::vector<const FingerprintSequence*> block;
    for (const auto& s : ds.sequences)
      if (s.tx_index == k) block.push_back(&s);
    std::stable_sort(block.begin(), block.end(), [](auto* a, auto* b) { return a->slot_index < b->slot_index; });
    if (random) std::shuffle(block.begin(), block.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(block.size()) + 1e-9));
    if (n_train == 0 || n_train == block.size())
      throw SizeError("split_train_test: class " + std::to_string(k) + " would be empty after the split");
    for (std::size_t i = 0; i < block.size(); ++i) (i < n_train ? train : test).sequences.push_back(*block[i]);
  }
  train.sort_blocks();
  test.sort_blocks();
  return {std::move(train), std::move(test)};
}

/// Per-dimension z-scoring with statistics taken from a training set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const LabeledDataset& train) {
    if (train.sequences.empty()) throw SizeError("Standardizer: empty training set");
    Standardizer s{std::vector<double>(train.d, 0.0), std::vector<double>(train.d, 0.0)};
    const double n = static_cast<double>(train.sequences.size() * train.l);
    for (const auto& seq : train.sequences)
      for (std::size_t i = 0; i < train.d; ++i)
        for (double v : seq.row(i)) s.mean[i] += v;
    for (auto& m : s.mean) m /= n;
    for (const auto& seq : train.sequences)
      for (std::size_t i = 0; i < train.d; ++i)
        for (double v : seq.row(i)) s.stddev[i] += (v - s.mean[i]) * (v - s.mean[i]);
    for (auto& sd : s.stddev) {
      sd = std::sqrt(sd / n);
      if (!(sd > 0.0)) sd = 1.0;
    }
    return s;
  }

  void apply(FingerprintSequence& seq) const {
    if (seq.d != mean.size()) throw ShapeError("Standardizer: dimension mismatch");
    for (std::size_t i = 0; i < seq.d; ++i)
      for (std::size_t t = 0; t < seq.l; ++t) seq.at(i, t) = (seq.at(i, t) - mean[i]) / stddev[i];
  }

  LabeledDataset apply(LabeledDataset ds) const {
    for (auto& s : ds.sequences) apply(s);
    return ds;
  }
};

}  // namespace irspla::fingerprint

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/fingerprint/fingerprint.hpp"

namespace irspla::baselines {

/// Row-major flattened samples; x holds size() rows of length dim.
struct FlatDataset {
  std::size_t dim = 0;
  std::size_t n_classes = 0;
  std::vector<double> x;
  std::vector<std::size_t> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  void push(std::span<const double> v, std::size_t label) {
    if (size() == 0 && dim == 0) dim = v.size();
    if (v.size() != dim) throw ShapeError("FlatDataset: sample length mismatch");
    x.insert(x.end(), v.begin(), v.end());
    y.push_back(label);
    if (label + 1 > n_classes) n_classes = label + 1;
  }
};

inline FlatDataset flatten(const fingerprint::LabeledDataset& ds) {
  FlatDataset out;
  out.dim = ds.d * ds.l;
  out.n_classes = ds.n_classes;
  out.x.reserve(ds.size() * out.dim);
  for (const auto& s : ds.sequences) {
    out.x.insert(out.x.end(), s.data.begin(), s.data.end());
    out.y.push_back(s.tx_index);
  }
  return out;
}

}  // namespace irspla::baselines

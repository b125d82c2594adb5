#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "irspla/errors.hpp"
#include "irspla/nn/tensor.hpp"
#include "irspla/random.hpp"

namespace irspla::nn {

/// Named learnable tensors in registration order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw ContractError("parameter '" + name + "' registered twice");
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(t));
    return entries_.back().second;
  }

  const Tensor& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
    return entries_[it->second].second;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : entries_) n += t.size();
    return n;
  }

  void zero_grad() {
    for (auto& [_, t] : entries_) t.zero_grad();
  }

  /// Independent copy: same values, fresh nodes and zero grads.
  ParamStore clone() const {
    ParamStore out;
    for (const auto& [name, t] : entries_) out.add(name, Tensor::make(t.shape(), t.values(), t.requires_grad()));
    return out;
  }

  /// Concatenated gradients in registration order.
  std::vector<double> flat_grad() const {
    std::vector<double> out;
    out.reserve(scalar_count());
    for (const auto& [_, t] : entries_) {
      const auto& g = t.grad();
      out.insert(out.end(), g.begin(), g.end());
    }
    return out;
  }

  std::vector<double> flat_values() const {
    std::vector<double> out;
    out.reserve(scalar_count());
    for (const auto& [_, t] : entries_) out.insert(out.end(), t.values().begin(), t.values().end());
    return out;
  }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// uniform(-sqrt(1/fan_in), sqrt(1/fan_in)).
inline Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = u(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

}  // namespace irspla::nn

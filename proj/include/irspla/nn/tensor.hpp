#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "irspla/errors.hpp"

namespace irspla::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

/// A value in the computation record. Interior nodes own a backward rule
/// that pushes `grad` into the grads of `inputs`.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
  bool is_leaf() const { return !backward; }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor make(Shape shape, std::vector<double> values, bool requires_grad) {
    if (numel(shape) != values.size())
      throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " + shape_string(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }
  static Tensor constant(Shape shape, std::vector<double> values) { return make(std::move(shape), std::move(values), false); }
  static Tensor parameter(Shape shape, std::vector<double> values) { return make(std::move(shape), std::move(values), true); }
  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const auto n = numel(shape);
    return make(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }
  static Tensor scalar(double v, bool requires_grad = false) { return make({1}, {v}, requires_grad); }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  const std::vector<double>& values() const { return node_->value; }
  std::vector<double>& mutable_values() { return node_->value; }
  const std::vector<double>& grad() const { return node_->ensure_grad(); }
  std::vector<double>& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

  double item() const {
    if (size() != 1) throw ContractError("item(): tensor of shape " + shape_string(shape()) + " is not a scalar");
    return node_->value[0];
  }
  double at(std::size_t i, std::size_t j) const { return node_->value[i * node_->shape.back() + j]; }

  /// Same values, cut off from the record.
  Tensor detach() const { return constant(shape(), values()); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Creates an op result. Inputs and the backward rule are kept only when
/// some input participates in differentiation.
inline Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                          std::function<void(Node&)> backward) {
  Tensor out = Tensor::make(std::move(shape), std::move(values), false);
  bool any = false;
  for (const auto& t : inputs) any = any || t.requires_grad();
  if (any) {
    Node* n = out.node();
    n->requires_grad = true;
    n->inputs.reserve(inputs.size());
    for (auto& t : inputs) n->inputs.push_back(t.ptr());
    n->backward = std::move(backward);
  }
  return out;
}

/// Topologically ordered view of every differentiable node reachable from
/// a root. Built once per backward pass.
class ComputationRecord {
 public:
  static ComputationRecord trace(const Tensor& root) {
    ComputationRecord rec;
    if (!root.requires_grad()) return rec;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root.node(), 0}};
    seen.insert(root.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        Node* child = node->inputs[next++].get();
        if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
      } else {
        rec.order_.push_back(node);
        stack.pop_back();
      }
    }
    return rec;
  }

  const std::vector<Node*>& nodes() const { return order_; }

  /// Seeds d(root)/d(root) = 1 and runs every backward rule once in reverse
  /// topological order. Leaf grads accumulate across calls; interior grads
  /// are reset first.
  void backward() {
    if (order_.empty()) return;
    Node* root = order_.back();
    if (root->value.size() != 1)
      throw ContractError("backward: loss must be scalar, got shape " + shape_string(root->shape));
    for (Node* n : order_)
      if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
    root->ensure_grad()[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node* n = *it;
      if (!n->is_leaf()) n->backward(*n);
    }
  }

 private:
  std::vector<Node*> order_;
};

inline void backward(const Tensor& loss) {
  if (loss.size() != 1) throw ContractError("backward: loss must be scalar, got shape " + shape_string(loss.shape()));
  ComputationRecord::trace(loss).backward();
}

}  // namespace irspla::nn

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "angkit/nn/tensor.hpp"

namespace angkit::nn {

/// Handle to one value in a computation graph. Copies share the same node.
///
/// A graph is owned by its output handles: each node keeps its parents alive.
/// Graphs are confined to the thread that builds them.
class Node {
 public:
  struct Impl;

  Node() = default;

  /// Leaf that never receives a gradient.
  static Node constant(Tensor value);
  /// Leaf that accumulates a gradient during backward().
  static Node variable(Tensor value);

  const Tensor& value() const;
  /// Gradient from the last backward() pass; empty tensor if none was needed.
  const Tensor& grad() const;
  bool requires_grad() const;
  const std::string& op() const;
  std::vector<Node> parents() const;
  const Shape& shape() const { return value().shape(); }

  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }
  Impl* impl() const noexcept { return impl_.get(); }

 private:
  friend Node make_node(std::string op, Tensor value, std::vector<Node> parents,
                        std::function<void(Impl&)> backward);
  friend void add_parent_for_testing(Node& child, const Node& parent);
  std::shared_ptr<Impl> impl_;
};

struct Node::Impl {
  Tensor value;
  Tensor grad;
  std::string op;
  std::vector<Node> parents;
  /// Reads this->grad and adds into parents' grads (only those requiring grad).
  std::function<void(Impl&)> backward;
  bool requires_grad = false;
};

/// Creates an interior node. requires_grad is inherited from the parents; the
/// backward closure is dropped when no parent needs a gradient.
Node make_node(std::string op, Tensor value, std::vector<Node> parents, std::function<void(Node::Impl&)> backward);

/// Reverse-mode pass from a scalar. Resets every gradient in the graph, seeds
/// d(loss)/d(loss) = 1, then visits nodes in reverse topological order.
/// Throws ShapeError for a non-scalar loss and Error when the graph has a cycle.
void backward(const Node& loss);

/// Appends a parent edge after construction. Only for exercising cycle detection.
void add_parent_for_testing(Node& child, const Node& parent);

}  // namespace angkit::nn

#include "angkit/nn/node.hpp"

#include <unordered_map>
#include <utility>

#include "angkit/errors.hpp"

namespace angkit::nn {

Node Node::constant(Tensor value) {
  Node n;
  n.impl_ = std::make_shared<Impl>();
  n.impl_->value = std::move(value);
  n.impl_->op = "constant";
  return n;
}

Node Node::variable(Tensor value) {
  Node n = constant(std::move(value));
  n.impl_->op = "variable";
  n.impl_->requires_grad = true;
  return n;
}

const Tensor& Node::value() const {
  if (!impl_) throw Error("value() on an empty node");
  return impl_->value;
}

const Tensor& Node::grad() const {
  if (!impl_) throw Error("grad() on an empty node");
  return impl_->grad;
}

bool Node::requires_grad() const { return impl_ && impl_->requires_grad; }

const std::string& Node::op() const {
  if (!impl_) throw Error("op() on an empty node");
  return impl_->op;
}

std::vector<Node> Node::parents() const { return impl_ ? impl_->parents : std::vector<Node>{}; }

Node make_node(std::string op, Tensor value, std::vector<Node> parents, std::function<void(Node::Impl&)> backward) {
  Node n;
  n.impl_ = std::make_shared<Node::Impl>();
  n.impl_->value = std::move(value);
  n.impl_->op = std::move(op);
  bool needs = false;
  for (const auto& p : parents) needs = needs || p.requires_grad();
  n.impl_->requires_grad = needs;
  if (needs) n.impl_->backward = std::move(backward);
  n.impl_->parents = std::move(parents);
  return n;
}

void add_parent_for_testing(Node& child, const Node& parent) {
  child.impl_->parents.push_back(parent);
  child.impl_->requires_grad = child.impl_->requires_grad || parent.requires_grad();
}

void backward(const Node& loss) {
  if (!loss) throw Error("backward() on an empty node");
  if (loss.value().size() != 1)
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_str(loss.value().shape()));

  enum class Mark { open, done };
  std::unordered_map<Node::Impl*, Mark> marks;
  std::vector<Node::Impl*> order;  // parents before children
  std::vector<std::pair<Node::Impl*, std::size_t>> stack;

  if (loss.requires_grad()) {
    stack.emplace_back(loss.impl(), 0);
    marks[loss.impl()] = Mark::open;
  }
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto* p = node->parents[next++].impl();
      if (!p->requires_grad) continue;
      auto it = marks.find(p);
      if (it == marks.end()) {
        marks[p] = Mark::open;
        stack.emplace_back(p, 0);
      } else if (it->second == Mark::open) {
        throw Error("cycle detected in computation graph at op '" + p->op + "'");
      }
      continue;
    }
    marks[node] = Mark::done;
    order.push_back(node);
    stack.pop_back();
  }

  for (auto* n : order) n->grad = Tensor(n->value.shape(), 0.0);
  auto* root = loss.impl();
  if (!root->requires_grad) root->grad = Tensor(root->value.shape(), 0.0);
  root->grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace angkit::nn

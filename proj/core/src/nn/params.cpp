#include "angkit/nn/params.hpp"

#include <cmath>

#include "angkit/errors.hpp"

namespace angkit::nn {

std::size_t ParamRegistry::add(std::string name, Tensor init) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  Parameter p;
  p.name = std::move(name);
  p.grad = Tensor(init.shape());
  p.momentum = Tensor(init.shape());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParamRegistry::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

Parameter& ParamRegistry::at(const std::string& name) {
  const auto i = find(name);
  if (!i) throw ConfigError("no parameter named '" + name + "'");
  return params_[*i];
}

const Parameter& ParamRegistry::at(const std::string& name) const {
  const auto i = find(name);
  if (!i) throw ConfigError("no parameter named '" + name + "'");
  return params_[*i];
}

std::size_t ParamRegistry::count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamRegistry::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::vector<Node> bind(const ParamRegistry& params) {
  std::vector<Node> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(Node::variable(p.value));
  return leaves;
}

void accumulate_grads(ParamRegistry& params, const std::vector<Node>& leaves, double scale) {
  if (leaves.size() != params.size()) throw ShapeError("leaf count does not match the parameter registry");
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const auto& g = leaves[i].grad();
    if (g.size() == params[i].grad.size() && g.size() > 0) params[i].grad.add_scaled(g, scale);
  }
}

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace angkit::nn

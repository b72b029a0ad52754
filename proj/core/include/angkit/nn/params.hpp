#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "angkit/nn/node.hpp"
#include "angkit/nn/tensor.hpp"

namespace angkit::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor momentum;
};

/// Named trainable tensors with gradient and momentum buffers of the same shape.
class ParamRegistry {
 public:
  /// Registers a tensor; throws ConfigError on a duplicate name.
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  /// Total number of scalar parameters.
  std::size_t count() const noexcept;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
};

/// Graph leaves for every parameter, in registry order.
std::vector<Node> bind(const ParamRegistry& params);

/// params[i].grad += scale * leaves[i].grad() for every leaf that got a gradient.
void accumulate_grads(ParamRegistry& params, const std::vector<Node>& leaves, double scale = 1.0);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

}  // namespace angkit::nn

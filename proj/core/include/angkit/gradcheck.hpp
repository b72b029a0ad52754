#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "angkit/nn/node.hpp"
#include "angkit/nn/tensor.hpp"
#include "angkit/topology.hpp"

namespace angkit {

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kPrimitiveTolerance = 1e-4;
inline constexpr double kNetworkTolerance = 1e-3;

/// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
/// turning round-off into large relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t entries = 0;
  bool passed() const { return max_rel_error < tolerance; }
};

/// Builds a scalar from leaves made out of `inputs`.
using ScalarFn = std::function<nn::Node(const std::vector<nn::Node>&)>;

/// Central differences against backward() for every entry of every input.
GradCheckResult check_gradients(const std::string& name, const ScalarFn& f, std::vector<nn::Tensor> inputs,
                                double tolerance, double h = kFiniteDifferenceStep);

/// Contracts a tensor node with a fixed random tensor to a scalar, so every
/// output entry gets a distinct upstream gradient.
nn::Node random_projection(const nn::Node& x, std::uint64_t seed);

/// One check per differentiable primitive on a random instance.
std::vector<GradCheckResult> check_primitives(std::uint64_t seed);

/// Five-joint tree used by the small end-to-end check.
SkeletonTopology tiny_topology();

/// End-to-end check of every network parameter on V=5, T=8, M=1, C=4, two classes.
GradCheckResult check_network(std::uint64_t seed);

/// Primitives and network for every seed.
std::vector<GradCheckResult> run_gradcheck_suite(std::span<const std::uint64_t> seeds);

}  // namespace angkit

#pragma once

#include <cstddef>
#include <vector>

#include "angkit/nn/tensor.hpp"
#include "angkit/topology.hpp"

namespace angkit {

/// V x V 0/1 matrix: A[i][j] = 1 iff (i, j) is a bone or i == j.
nn::Tensor build_adjacency(const SkeletonTopology& topo);

/// Binarised boolean power: entry (i, j) is 1 iff graph distance(i, j) <= k.
/// Expects a binary matrix with unit diagonal. Throws ConfigError for k < 1.
nn::Tensor k_hop_reachability(const nn::Tensor& adjacency, std::size_t k);

/// Divides each row by its sum. Throws ShapeError when a row sums to zero.
nn::Tensor normalize_rows(const nn::Tensor& binary);

/// Longest shortest path between two joints.
std::size_t graph_diameter(const SkeletonTopology& topo);

/// One scale of the spatial multiscale graph convolution.
///
/// The operator applied to features is normalized + mask. The mask starts at
/// zero; in a model it is a trained parameter and lives in the registry.
struct GraphOperator {
  std::size_t scale = 1;
  nn::Tensor base;        // k-hop reachability, symmetric with unit diagonal
  nn::Tensor normalized;  // row-normalised base
  nn::Tensor mask;        // additive, zero at construction

  nn::Tensor effective() const;
};

/// Operators for scales 1..num_scales.
std::vector<GraphOperator> build_graph_operators(const SkeletonTopology& topo, std::size_t num_scales);

}  // namespace angkit

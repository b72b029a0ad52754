#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "angkit/nn/node.hpp"

namespace angkit::nn {

// Structural and elementwise primitives. Every op checks shapes and throws
// ShapeError naming both shapes on mismatch.

Node matmul(const Node& a, const Node& b);  // [n,k] x [k,m] -> [n,m]
Node add(const Node& a, const Node& b);     // same shape
Node mul_scalar(const Node& a, double s);
Node relu(const Node& a);
Node reshape(const Node& a, Shape shape);
Node sum(const Node& a);  // -> scalar of shape [1]
/// Channels [offset, offset + count) of axis 0.
Node slice_channels(const Node& a, std::size_t offset, std::size_t count);
/// Concatenation along axis 0; all other dims must agree.
Node concat_channels(std::span<const Node> parts);

// Layers over activations laid out [C, T, V, M].

/// out[o, s] = sum_i w[o, i] * x[i, s] + bias[o] for every site s = (t, v, m).
Node conv_1x1(const Node& x, const Node& w, const Node& bias);

/// out[c, t, v, m] = sum_u adj[v, u] * x[c, t, u, m].
Node graph_aggregate(const Node& x, const Node& adj);

/// Depthwise 3x1 convolution along T with zero padding:
/// out[c, t] = sum_{i in -1,0,1} w[c, i + 1] * x[c, t + i * dilation].
Node temporal_conv_3x1(const Node& x, const Node& w, std::size_t dilation);

/// Sliding max over frames {t-1, t, t+1}, out-of-range taps read 0. Backward
/// routes to the first maximal tap.
Node temporal_maxpool_3x1(const Node& x);

/// Mean over (T, V, M): [C, T, V, M] -> [C].
Node global_avg_pool(const Node& x);

/// Fully connected: w[K, C] x [C] + b[K] -> [K].
Node linear(const Node& x, const Node& w, const Node& bias);

std::vector<double> softmax(std::span<const double> logits);

struct LossOutput {
  Node loss;  // scalar -log p[label]
  std::vector<double> probs;
};

/// Max-shifted softmax followed by negative log-likelihood. Backward: probs - onehot.
LossOutput softmax_cross_entropy(const Node& logits, std::size_t label);

}  // namespace angkit::nn

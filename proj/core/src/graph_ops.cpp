#include "angkit/graph_ops.hpp"

#include <algorithm>
#include <queue>

#include "angkit/errors.hpp"

namespace angkit {

nn::Tensor build_adjacency(const SkeletonTopology& topo) {
  const auto v = static_cast<std::size_t>(topo.num_joints);
  nn::Tensor a({v, v});
  for (std::size_t i = 0; i < v; ++i) a[i * v + i] = 1.0;
  for (const auto& e : topo.edges) {
    const auto i = static_cast<std::size_t>(e.first), j = static_cast<std::size_t>(e.second);
    a[i * v + j] = 1.0;
    a[j * v + i] = 1.0;
  }
  return a;
}

nn::Tensor k_hop_reachability(const nn::Tensor& adjacency, std::size_t k) {
  if (k < 1) throw ConfigError("k_hop_reachability needs k >= 1");
  if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1))
    throw ShapeError("k_hop_reachability needs a square matrix, got " + nn::shape_str(adjacency.shape()));
  const auto v = adjacency.dim(0);
  nn::Tensor reach = adjacency;
  for (std::size_t step = 1; step < k; ++step) {
    nn::Tensor next({v, v});
    for (std::size_t i = 0; i < v; ++i)
      for (std::size_t m = 0; m < v; ++m) {
        if (reach[i * v + m] == 0.0) continue;
        for (std::size_t j = 0; j < v; ++j) {
          if (adjacency[m * v + j] != 0.0) next[i * v + j] = 1.0;
        }
      }
    if (next == reach) break;  // fixed point reached
    reach = std::move(next);
  }
  return reach;
}

nn::Tensor normalize_rows(const nn::Tensor& binary) {
  if (binary.rank() != 2) throw ShapeError("normalize_rows needs a matrix, got " + nn::shape_str(binary.shape()));
  const auto rows = binary.dim(0), cols = binary.dim(1);
  nn::Tensor out(binary.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += binary[i * cols + j];
    if (s == 0.0) throw ShapeError("normalize_rows: row " + std::to_string(i) + " sums to zero");
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = binary[i * cols + j] / s;
  }
  return out;
}

std::size_t graph_diameter(const SkeletonTopology& topo) {
  const auto adj = topo.neighbours();
  const auto v = static_cast<std::size_t>(topo.num_joints);
  std::size_t best = 0;
  for (std::size_t s = 0; s < v; ++s) {
    std::vector<std::size_t> dist(v, v + 1);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto n : adj[u]) {
        const auto nn_ = static_cast<std::size_t>(n);
        if (dist[nn_] > v) {
          dist[nn_] = dist[u] + 1;
          q.push(nn_);
        }
      }
    }
    for (auto d : dist) {
      if (d <= v) best = std::max(best, d);
    }
  }
  return best;
}

nn::Tensor GraphOperator::effective() const {
  nn::Tensor out = normalized;
  out.add_scaled(mask);
  return out;
}

std::vector<GraphOperator> build_graph_operators(const SkeletonTopology& topo, std::size_t num_scales) {
  if (num_scales < 1) throw ConfigError("need at least one graph scale");
  const auto a = build_adjacency(topo);
  std::vector<GraphOperator> ops;
  for (std::size_t k = 1; k <= num_scales; ++k) {
    GraphOperator op;
    op.scale = k;
    op.base = k_hop_reachability(a, k);
    op.normalized = normalize_rows(op.base);
    op.mask = nn::Tensor(op.base.shape());
    ops.push_back(std::move(op));
  }
  return ops;
}

}  // namespace angkit

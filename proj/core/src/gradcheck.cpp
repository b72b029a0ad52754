#include "angkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "angkit/angnet.hpp"
#include "angkit/nn/ops.hpp"
#include "angkit/nn/params.hpp"

namespace angkit {

using nn::Node;
using nn::Tensor;

namespace {

Tensor random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Values in [-1, -0.1] or [0.1, 1], away from the relu kink.
Tensor off_kink_tensor(nn::Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

std::vector<Node> leaves_of(const std::vector<Tensor>& inputs) {
  std::vector<Node> leaves;
  for (const auto& t : inputs) leaves.push_back(Node::variable(t));
  return leaves;
}

double eval(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  std::vector<Node> leaves;
  for (const auto& t : inputs) leaves.push_back(Node::constant(t));
  return f(leaves).value()[0];
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradients(const std::string& name, const ScalarFn& f, std::vector<Tensor> inputs,
                                double tolerance, double h) {
  GradCheckResult r{name, 0.0, tolerance, 0};
  const auto leaves = leaves_of(inputs);
  const auto loss = f(leaves);
  nn::backward(loss);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& analytic = leaves[i].grad();
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double saved = inputs[i][j];
      inputs[i][j] = saved + h;
      const double up = eval(f, inputs);
      inputs[i][j] = saved - h;
      const double down = eval(f, inputs);
      inputs[i][j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.size() == inputs[i].size() ? analytic[j] : 0.0;
      r.max_rel_error = std::max(r.max_rel_error, relative_error(a, numeric));
      ++r.entries;
    }
  }
  return r;
}

Node random_projection(const Node& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = x.value().size();
  const auto w = Node::constant(random_tensor({n, 1}, rng));
  return nn::sum(nn::matmul(nn::reshape(x, {1, n}), w));
}

std::vector<GradCheckResult> check_primitives(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto proj_seed = rng();
  auto P = [proj_seed](const Node& x) { return random_projection(x, proj_seed); };
  const double tol = kPrimitiveTolerance;
  const std::string tag = " seed=" + std::to_string(seed);
  std::vector<GradCheckResult> out;

  out.push_back(check_gradients("matmul" + tag, [&](const auto& in) { return P(nn::matmul(in[0], in[1])); },
                                {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}, tol));
  out.push_back(check_gradients("add" + tag, [&](const auto& in) { return P(nn::add(in[0], in[1])); },
                                {random_tensor({2, 3, 2, 1}, rng), random_tensor({2, 3, 2, 1}, rng)}, tol));
  out.push_back(check_gradients("mul_scalar" + tag, [&](const auto& in) { return P(nn::mul_scalar(in[0], -1.7)); },
                                {random_tensor({5}, rng)}, tol));
  out.push_back(check_gradients("relu" + tag, [&](const auto& in) { return P(nn::relu(in[0])); },
                                {off_kink_tensor({3, 4, 2, 1}, rng)}, tol));
  out.push_back(check_gradients("reshape" + tag, [&](const auto& in) { return P(nn::reshape(in[0], {4, 6})); },
                                {random_tensor({2, 3, 4}, rng)}, tol));
  out.push_back(check_gradients("sum" + tag, [&](const auto& in) { return nn::mul_scalar(nn::sum(in[0]), 0.3); },
                                {random_tensor({3, 2}, rng)}, tol));
  out.push_back(check_gradients("slice_channels" + tag,
                                [&](const auto& in) { return P(nn::slice_channels(in[0], 1, 2)); },
                                {random_tensor({4, 3, 2, 1}, rng)}, tol));
  out.push_back(check_gradients("concat_channels" + tag,
                                [&](const auto& in) {
                                  const std::vector<Node> parts{in[0], in[1]};
                                  return P(nn::concat_channels(parts));
                                },
                                {random_tensor({2, 3, 2, 1}, rng), random_tensor({3, 3, 2, 1}, rng)}, tol));
  out.push_back(check_gradients("conv_1x1" + tag, [&](const auto& in) { return P(nn::conv_1x1(in[0], in[1], in[2])); },
                                {random_tensor({3, 4, 2, 2}, rng), random_tensor({5, 3}, rng), random_tensor({5}, rng)},
                                tol));
  out.push_back(check_gradients("graph_aggregate" + tag,
                                [&](const auto& in) { return P(nn::graph_aggregate(in[0], in[1])); },
                                {random_tensor({2, 3, 4, 1}, rng), random_tensor({4, 4}, rng)}, tol));
  for (std::size_t d : {1, 2, 3}) {
    out.push_back(check_gradients("temporal_conv_3x1 d=" + std::to_string(d) + tag,
                                  [&](const auto& in) { return P(nn::temporal_conv_3x1(in[0], in[1], d)); },
                                  {random_tensor({3, 7, 2, 1}, rng), random_tensor({3, 3}, rng)}, tol));
  }
  out.push_back(check_gradients("temporal_maxpool_3x1" + tag,
                                [&](const auto& in) { return P(nn::temporal_maxpool_3x1(in[0])); },
                                {random_tensor({2, 6, 3, 1}, rng)}, tol));
  out.push_back(check_gradients("global_avg_pool" + tag, [&](const auto& in) { return P(nn::global_avg_pool(in[0])); },
                                {random_tensor({3, 4, 2, 2}, rng)}, tol));
  out.push_back(check_gradients("linear" + tag, [&](const auto& in) { return P(nn::linear(in[0], in[1], in[2])); },
                                {random_tensor({4}, rng), random_tensor({3, 4}, rng), random_tensor({3}, rng)}, tol));
  const std::size_t label = rng() % 4;
  out.push_back(check_gradients("softmax_cross_entropy" + tag,
                                [&](const auto& in) { return nn::softmax_cross_entropy(in[0], label).loss; },
                                {random_tensor({4}, rng, -3.0, 3.0)}, tol));
  return out;
}

SkeletonTopology tiny_topology() {
  SkeletonTopology t;
  t.name = "tiny5";
  t.num_joints = 5;
  t.joint_names = {"pelvis", "spine", "neck", "arm_left", "arm_right"};
  t.edges = {{0, 1}, {1, 2}, {2, 3}, {2, 4}};
  t.neck = 2;
  t.pelvis = 0;
  t.bone_parent = {std::nullopt, 0, 1, 2, 2};
  t.local_pairs = {std::nullopt, JointPair{0, 2}, JointPair{3, 4}, std::nullopt, std::nullopt};
  t.endpoint_pairs = {{3, 4}, {3, 4}, {3, 4}, {3, 4}};
  t.angle_table = standard_angle_table(t);
  validate(t);
  return t;
}

GradCheckResult check_network(std::uint64_t seed) {
  AngNetConfig cfg;
  cfg.in_channels = 4;
  cfg.num_classes = 2;
  cfg.num_scales = 2;
  cfg.channels = {6, 6, 12};
  cfg.seed = seed;
  AngNet net(cfg, tiny_topology());

  // Move biases and masks off their zero initialization so they are checked
  // at a generic point.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<Tensor> inputs;
  for (auto& p : net.params()) {
    for (auto& v : p.value.data()) v += jitter(rng);
    inputs.push_back(p.value);
  }
  const auto x = Node::constant(random_tensor({4, 8, 5, 1}, rng));
  const std::size_t label = rng() % 2;
  auto f = [&](const std::vector<Node>& leaves) {
    return nn::softmax_cross_entropy(net.forward(x, leaves), label).loss;
  };
  return check_gradients("angnet end-to-end seed=" + std::to_string(seed), f, std::move(inputs), kNetworkTolerance);
}

std::vector<GradCheckResult> run_gradcheck_suite(std::span<const std::uint64_t> seeds) {
  std::vector<GradCheckResult> all;
  for (auto s : seeds) {
    auto prims = check_primitives(s);
    all.insert(all.end(), prims.begin(), prims.end());
    all.push_back(check_network(s));
  }
  return all;
}

}  // namespace angkit

#include "angkit/angnet.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "angkit/errors.hpp"
#include "angkit/nn/ops.hpp"

namespace angkit {

using nn::Node;
using nn::Tensor;

void validate(const AngNetConfig& cfg) {
  if (cfg.in_channels < 1) throw ConfigError("in_channels must be at least 1");
  if (cfg.num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (cfg.num_scales < 1) throw ConfigError("num_scales must be at least 1");
  for (auto c : cfg.channels) {
    if (c == 0 || c % 6 != 0)
      throw ConfigError("block width " + std::to_string(c) + " is not a positive multiple of 6");
  }
  std::set<std::size_t> seen;
  for (auto d : cfg.dilations) {
    if (d < 1) throw ConfigError("dilations must be at least 1");
    if (!seen.insert(d).second) throw ConfigError("dilations must be distinct");
  }
}

namespace {

std::size_t smgc_count(std::size_t cin, std::size_t cout, std::size_t scales, std::size_t joints) {
  return scales * (cin * cout + cout + joints * joints);
}

std::size_t tmc_count(std::size_t cin, std::size_t cout) {
  const auto b = cout / 6;
  std::size_t n = 6 * (cin * b + b) + 4 * 3 * b;
  if (cin != cout) n += cin * cout + cout;
  return n;
}

}  // namespace

std::size_t expected_param_count(const AngNetConfig& cfg, std::size_t joints) {
  std::size_t n = 0;
  std::size_t cin = cfg.in_channels;
  for (auto cout : cfg.channels) {
    n += smgc_count(cin, cout, cfg.num_scales, joints);
    n += 3 * tmc_count(cout, cout);
    cin = cout;
  }
  return n + cin * cfg.num_classes + cfg.num_classes;
}

Node input_node(const FeatureTensor& f) {
  const auto& s = f.shape();
  return Node::constant(Tensor({s.channels, s.frames, s.joints, s.persons},
                               std::vector<double>(f.data().begin(), f.data().end())));
}

AngNet::AngNet(AngNetConfig cfg, SkeletonTopology topo) : cfg_(cfg), topo_(std::move(topo)) {
  validate(cfg_);
  validate(topo_);
  operators_ = build_graph_operators(topo_, cfg_.num_scales);
  const auto joints = static_cast<std::size_t>(topo_.num_joints);

  std::mt19937_64 rng(cfg_.seed);
  auto conv = [&](const std::string& name, std::size_t cin, std::size_t cout, std::size_t& w, std::size_t& b) {
    w = params_.add(name + ".w", nn::glorot_uniform({cout, cin}, cin, cout, rng));
    b = params_.add(name + ".b", Tensor({cout}));
  };

  std::size_t cin = cfg_.in_channels;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    const auto cout = cfg_.channels[blk];
    const auto prefix = "stb" + std::to_string(blk);
    SmgcParams sp;
    for (std::size_t k = 0; k < cfg_.num_scales; ++k) {
      std::size_t w = 0, b = 0;
      conv(prefix + ".smgc.scale" + std::to_string(k + 1), cin, cout, w, b);
      sp.weight.push_back(w);
      sp.bias.push_back(b);
      sp.mask.push_back(params_.add(prefix + ".smgc.mask" + std::to_string(k + 1), Tensor({joints, joints})));
    }
    smgc_.push_back(std::move(sp));

    for (std::size_t u = 0; u < 3; ++u)
      tmc_.push_back(register_tmc(params_, prefix + ".tmc" + std::to_string(u), cout, cout, rng));
    cin = cout;
  }
  fc_w_ = params_.add("fc.w", nn::glorot_uniform({cfg_.num_classes, cin}, cin, cfg_.num_classes, rng));
  fc_b_ = params_.add("fc.b", Tensor({cfg_.num_classes}));
}

Node smgc_forward(const Node& x, std::span<const GraphOperator> operators, std::span<const Node> masks,
                  std::span<const Node> weights, std::span<const Node> biases) {
  if (operators.empty()) throw ConfigError("spatial graph convolution needs at least one scale");
  if (masks.size() != operators.size() || weights.size() != operators.size() || biases.size() != operators.size())
    throw ConfigError("spatial graph convolution needs one mask, weight and bias per scale");
  Node acc;
  for (std::size_t k = 0; k < operators.size(); ++k) {
    const auto adj = nn::add(Node::constant(operators[k].normalized), masks[k]);
    const auto y = nn::conv_1x1(nn::graph_aggregate(x, adj), weights[k], biases[k]);
    acc = acc ? nn::add(acc, y) : y;
  }
  return nn::relu(acc);
}

Node tmc_forward(const Node& x, const TmcWeights& w, const std::array<std::size_t, 4>& dilations) {
  std::vector<Node> branches;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto z = nn::conv_1x1(x, w.weight[i], w.bias[i]);
    branches.push_back(nn::temporal_conv_3x1(z, w.depthwise[i], dilations[i]));
  }
  branches.push_back(nn::conv_1x1(x, w.weight[4], w.bias[4]));
  branches.push_back(nn::temporal_maxpool_3x1(nn::conv_1x1(x, w.weight[5], w.bias[5])));
  const auto merged = nn::concat_channels(branches);
  const auto residual = w.residual_weight ? nn::conv_1x1(x, w.residual_weight, w.residual_bias) : x;
  return nn::relu(nn::add(merged, residual));
}

AngNet::TmcParams register_tmc(nn::ParamRegistry& params, const std::string& prefix, std::size_t cin,
                               std::size_t cout, std::mt19937_64& rng) {
  if (cout == 0 || cout % 6 != 0)
    throw ConfigError("temporal unit width " + std::to_string(cout) + " is not a positive multiple of 6");
  AngNet::TmcParams tp;
  tp.in_channels = cin;
  tp.out_channels = cout;
  const auto width = cout / 6;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto name = prefix + ".branch" + std::to_string(i);
    tp.weight[i] = params.add(name + ".w", nn::glorot_uniform({width, cin}, cin, width, rng));
    tp.bias[i] = params.add(name + ".b", Tensor({width}));
  }
  for (std::size_t i = 0; i < 4; ++i)
    tp.depthwise[i] = params.add(prefix + ".dilated" + std::to_string(i), nn::glorot_uniform({width, 3}, 3, 3, rng));
  if (cin != cout) {
    tp.projected = true;
    tp.residual_weight = params.add(prefix + ".residual.w", nn::glorot_uniform({cout, cin}, cin, cout, rng));
    tp.residual_bias = params.add(prefix + ".residual.b", Tensor({cout}));
  }
  return tp;
}

TmcWeights tmc_weights(const AngNet::TmcParams& tp, const std::vector<Node>& p) {
  TmcWeights w;
  for (std::size_t i = 0; i < 6; ++i) {
    w.weight[i] = p[tp.weight[i]];
    w.bias[i] = p[tp.bias[i]];
  }
  for (std::size_t i = 0; i < 4; ++i) w.depthwise[i] = p[tp.depthwise[i]];
  if (tp.projected) {
    w.residual_weight = p[tp.residual_weight];
    w.residual_bias = p[tp.residual_bias];
  }
  return w;
}

Node AngNet::smgc(std::size_t block, const Node& x, const std::vector<Node>& p) const {
  const auto& sp = smgc_.at(block);
  std::vector<Node> masks, weights, biases;
  for (std::size_t k = 0; k < sp.weight.size(); ++k) {
    masks.push_back(p[sp.mask[k]]);
    weights.push_back(p[sp.weight[k]]);
    biases.push_back(p[sp.bias[k]]);
  }
  return smgc_forward(x, operators_, masks, weights, biases);
}

Node AngNet::tmc(std::size_t block, std::size_t unit, const Node& x, const std::vector<Node>& p) const {
  return tmc_forward(x, tmc_weights(tmc_.at(block * 3 + unit), p), cfg_.dilations);
}

Node AngNet::forward(const Node& input, const std::vector<Node>& leaves) const {
  const auto& s = input.shape();
  if (s.size() != 4) throw ShapeError("network input must be [C,T,V,M], got " + nn::shape_str(s));
  if (s[0] != cfg_.in_channels)
    throw ShapeError("network expects C=" + std::to_string(cfg_.in_channels) + " input channels, got C=" +
                     std::to_string(s[0]));
  if (s[2] != static_cast<std::size_t>(topo_.num_joints))
    throw ShapeError("network expects V=" + std::to_string(topo_.num_joints) + " joints, got V=" + std::to_string(s[2]));
  if (leaves.size() != params_.size()) throw ShapeError("parameter leaves do not match the registry");

  Node h = input;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    h = smgc(blk, h, leaves);
    for (std::size_t u = 0; u < 3; ++u) h = tmc(blk, u, h, leaves);
  }
  return nn::linear(nn::global_avg_pool(h), leaves[fc_w_], leaves[fc_b_]);
}

std::vector<Node> bind_constants(const nn::ParamRegistry& params) {
  std::vector<Node> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(Node::constant(p.value));
  return leaves;
}

std::vector<double> AngNet::logits(const FeatureTensor& features) const {
  const auto out = forward(input_node(features), bind_constants(params_));
  return {out.value().data().begin(), out.value().data().end()};
}

std::vector<double> AngNet::probabilities(const FeatureTensor& features) const {
  return nn::softmax(logits(features));
}

std::size_t AngNet::predict(const FeatureTensor& features) const {
  const auto z = logits(features);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace angkit

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "angkit/feature_tensor.hpp"
#include "angkit/graph_ops.hpp"
#include "angkit/nn/node.hpp"
#include "angkit/nn/params.hpp"
#include "angkit/topology.hpp"

namespace angkit {

struct AngNetConfig {
  std::size_t in_channels = 15;
  std::size_t num_classes = 2;
  std::size_t num_scales = 4;
  /// Output width of each spatial-temporal block; each must be divisible by 6.
  std::array<std::size_t, 3> channels = {24, 48, 96};
  std::array<std::size_t, 4> dilations = {1, 2, 3, 4};
  std::uint64_t seed = 0;

  friend bool operator==(const AngNetConfig&, const AngNetConfig&) = default;
};

/// Throws ConfigError when a field is out of range.
void validate(const AngNetConfig& cfg);

/// Number of scalar parameters the network has for a config and joint count.
std::size_t expected_param_count(const AngNetConfig& cfg, std::size_t joints);

/// Packs a feature tensor as a [C, T, V, M] graph constant.
nn::Node input_node(const FeatureTensor& features);

/// Spatial multiscale graph convolution. Scale k aggregates joints with
/// (operators[k].normalized + masks[k]), maps channels with weights[k] and
/// biases[k]; the scales are summed and passed through relu.
/// Throws ConfigError when no scale is given.
nn::Node smgc_forward(const nn::Node& x, std::span<const GraphOperator> operators, std::span<const nn::Node> masks,
                      std::span<const nn::Node> weights, std::span<const nn::Node> biases);

/// Graph leaves for one temporal multiscale convolution unit.
struct TmcWeights {
  std::array<nn::Node, 6> weight, bias;  // 1x1 entry of each computational branch
  std::array<nn::Node, 4> depthwise;     // [width, 3] kernels of the dilated branches
  nn::Node residual_weight, residual_bias;  // empty for an identity residual
};

/// Temporal multiscale convolution: four 1x1 + dilated depthwise 3x1 branches,
/// one 1x1 branch, one 1x1 + 3x1 max-pool branch, concatenated, plus the
/// residual path, then relu.
nn::Node tmc_forward(const nn::Node& x, const TmcWeights& w, const std::array<std::size_t, 4>& dilations);

/// Spatial-temporal graph network over skeleton feature tensors.
///
/// Three blocks, each a spatial multiscale graph convolution followed by three
/// temporal multiscale convolutions, then global average pooling and a fully
/// connected layer. forward() returns logits; softmax lives in the loss and
/// in prediction helpers.
class AngNet {
 public:
  AngNet(AngNetConfig cfg, SkeletonTopology topo);

  const AngNetConfig& config() const noexcept { return cfg_; }
  const SkeletonTopology& topology() const noexcept { return topo_; }
  const std::vector<GraphOperator>& graph_operators() const noexcept { return operators_; }
  nn::ParamRegistry& params() noexcept { return params_; }
  const nn::ParamRegistry& params() const noexcept { return params_; }
  std::size_t num_params() const noexcept { return params_.count(); }

  /// Builds the graph for one sample. `leaves` must come from bind(params()).
  /// Throws ShapeError when the input channel count differs from the config.
  nn::Node forward(const nn::Node& input, const std::vector<nn::Node>& leaves) const;

  /// Inference without gradient bookkeeping.
  std::vector<double> logits(const FeatureTensor& features) const;
  std::vector<double> probabilities(const FeatureTensor& features) const;
  std::size_t predict(const FeatureTensor& features) const;

  // Individual stages, exposed for composition tests.
  nn::Node smgc(std::size_t block, const nn::Node& x, const std::vector<nn::Node>& leaves) const;
  nn::Node tmc(std::size_t block, std::size_t unit, const nn::Node& x, const std::vector<nn::Node>& leaves) const;

  struct SmgcParams {
    std::vector<std::size_t> weight, bias, mask;  // one per scale
  };
  struct TmcParams {
    std::array<std::size_t, 6> weight{}, bias{};
    std::array<std::size_t, 4> depthwise{};
    std::size_t residual_weight = 0, residual_bias = 0;
    bool projected = false;
    std::size_t in_channels = 0, out_channels = 0;
  };
  const SmgcParams& smgc_params(std::size_t block) const { return smgc_.at(block); }
  const TmcParams& tmc_params(std::size_t block, std::size_t unit) const { return tmc_.at(block * 3 + unit); }
  std::size_t fc_weight() const noexcept { return fc_w_; }
  std::size_t fc_bias() const noexcept { return fc_b_; }

 private:
  AngNetConfig cfg_;
  SkeletonTopology topo_;
  std::vector<GraphOperator> operators_;
  nn::ParamRegistry params_;
  std::vector<SmgcParams> smgc_;
  std::vector<TmcParams> tmc_;
  std::size_t fc_w_ = 0, fc_b_ = 0;
};

/// Registers the parameters of one temporal unit under `prefix`. Adds a 1x1
/// residual projection when in_channels != out_channels. Throws ConfigError
/// when out_channels is not a positive multiple of 6.
AngNet::TmcParams register_tmc(nn::ParamRegistry& params, const std::string& prefix, std::size_t in_channels,
                               std::size_t out_channels, std::mt19937_64& rng);

/// Gathers the leaves of one temporal unit.
TmcWeights tmc_weights(const AngNet::TmcParams& tp, const std::vector<nn::Node>& leaves);

/// Leaves that do not track gradients, for inference.
std::vector<nn::Node> bind_constants(const nn::ParamRegistry& params);

}  // namespace angkit

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "angkit/angnet.hpp"
#include "angkit/encoders.hpp"
#include "angkit/errors.hpp"
#include "angkit/nn/ops.hpp"
#include "test_util.hpp"

namespace angkit {
namespace {

using nn::Node;
using nn::Tensor;

Tensor random_tensor(nn::Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(std::move(s));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

AngNetConfig small_config(std::size_t in_channels) {
  AngNetConfig cfg;
  cfg.in_channels = in_channels;
  cfg.num_classes = 3;
  cfg.num_scales = 2;
  cfg.channels = {6, 6, 12};
  return cfg;
}

TEST(Smgc, SingleJointReducesToChannelMixing) {
  std::mt19937_64 rng(1);
  GraphOperator op;
  op.normalized = Tensor({1, 1}, {1.0});
  const std::vector<GraphOperator> ops = {op};
  const auto x = Node::constant(random_tensor({2, 3, 1, 1}, rng));
  const std::vector<Node> masks = {Node::constant(Tensor({1, 1}))};
  const std::vector<Node> w = {Node::constant(random_tensor({4, 2}, rng))};
  const std::vector<Node> b = {Node::constant(random_tensor({4}, rng))};
  const auto y = smgc_forward(x, ops, masks, w, b);
  const auto expected = nn::relu(nn::conv_1x1(x, w[0], b[0]));
  EXPECT_EQ(y.value(), expected.value());
  EXPECT_THROW(smgc_forward(x, std::span<const GraphOperator>{}, {}, {}, {}), ConfigError);
  EXPECT_THROW(smgc_forward(x, ops, {}, w, b), ConfigError);
}

TEST(Smgc, MatchesLoopOracle) {
  std::mt19937_64 rng(2);
  const auto ops = build_graph_operators(kinect25(), 3);
  const std::size_t C = 3, Co = 4, T = 2, V = 25, M = 2;
  const auto x = random_tensor({C, T, V, M}, rng);
  std::vector<Node> masks, w, b;
  for (std::size_t k = 0; k < 3; ++k) {
    masks.push_back(Node::constant(random_tensor({V, V}, rng, -0.1, 0.1)));
    w.push_back(Node::constant(random_tensor({Co, C}, rng)));
    b.push_back(Node::constant(random_tensor({Co}, rng)));
  }
  const auto y = smgc_forward(Node::constant(x), ops, masks, w, b).value();
  auto xi = [&](std::size_t c, std::size_t t, std::size_t v, std::size_t m) { return x[((c * T + t) * V + v) * M + m]; };
  for (std::size_t o = 0; o < Co; ++o)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t v = 0; v < V; ++v)
        for (std::size_t m = 0; m < M; ++m) {
          double acc = 0.0;
          for (std::size_t k = 0; k < 3; ++k) {
            acc += b[k].value()[o];
            for (std::size_t c = 0; c < C; ++c)
              for (std::size_t u = 0; u < V; ++u)
                acc += w[k].value()[o * C + c] *
                       (ops[k].normalized[v * V + u] + masks[k].value()[v * V + u]) * xi(c, t, u, m);
          }
          EXPECT_NEAR(y[((o * T + t) * V + v) * M + m], std::max(acc, 0.0), 1e-12);
        }
}

TEST(Smgc, ConstantOverJointsStaysConstant) {
  std::mt19937_64 rng(3);
  const auto ops = build_graph_operators(kinect25(), 4);
  Tensor x({2, 1, 25, 1});
  for (std::size_t v = 0; v < 25; ++v) {
    x[v] = 0.7;
    x[25 + v] = -0.3;
  }
  std::vector<Node> masks, w, b;
  for (std::size_t k = 0; k < 4; ++k) {
    masks.push_back(Node::constant(Tensor({25, 25})));
    w.push_back(Node::constant(random_tensor({3, 2}, rng)));
    b.push_back(Node::constant(random_tensor({3}, rng)));
  }
  const auto y = smgc_forward(Node::constant(x), ops, masks, w, b).value();
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t v = 1; v < 25; ++v) EXPECT_NEAR(y[o * 25 + v], y[o * 25], 1e-12);
}

TmcWeights zero_tmc(std::size_t cin, std::size_t cout) {
  TmcWeights w;
  const auto width = cout / 6;
  for (std::size_t i = 0; i < 6; ++i) {
    w.weight[i] = Node::constant(Tensor({width, cin}));
    w.bias[i] = Node::constant(Tensor({width}));
  }
  for (auto& d : w.depthwise) d = Node::constant(Tensor({width, 3}));
  return w;
}

TEST(Tmc, ZeroBranchesGiveReluOfInput) {
  std::mt19937_64 rng(4);
  const auto x = Node::constant(random_tensor({6, 5, 3, 2}, rng));
  const auto y = tmc_forward(x, zero_tmc(6, 6), {1, 2, 3, 4});
  EXPECT_EQ(y.value(), nn::relu(x).value());
}

TEST(Tmc, SingleFrameSeesOnlyTheCenterTap) {
  std::mt19937_64 rng(5);
  nn::ParamRegistry reg;
  const auto tp = register_tmc(reg, "u", 6, 6, rng);
  const auto leaves = bind_constants(reg);
  auto w = tmc_weights(tp, leaves);
  const auto x = Node::constant(random_tensor({6, 1, 4, 1}, rng));
  const auto y = tmc_forward(x, w, {1, 2, 3, 4});
  // Replace every depthwise kernel with only its center tap; output is unchanged.
  for (auto& d : w.depthwise) {
    Tensor c(d.shape());
    for (std::size_t r = 0; r < c.dim(0); ++r) c[r * 3 + 1] = d.value()[r * 3 + 1];
    d = Node::constant(c);
  }
  EXPECT_EQ(tmc_forward(x, w, {1, 2, 3, 4}).value(), y.value());
}

TEST(Tmc, ProjectedResidualWhenWidthChanges) {
  std::mt19937_64 rng(6);
  nn::ParamRegistry reg;
  const auto tp = register_tmc(reg, "p", 4, 12, rng);
  EXPECT_TRUE(tp.projected);
  EXPECT_TRUE(reg.find("p.residual.w"));
  EXPECT_EQ(reg.at("p.residual.w").value.shape(), (nn::Shape{12, 4}));
  const auto leaves = bind_constants(reg);
  auto w = tmc_weights(tp, leaves);
  const auto x = Node::constant(random_tensor({4, 3, 2, 1}, rng));
  EXPECT_EQ(tmc_forward(x, w, {1, 2, 3, 4}).shape(), (nn::Shape{12, 3, 2, 1}));

  auto zero = zero_tmc(4, 12);
  zero.residual_weight = w.residual_weight;
  zero.residual_bias = w.residual_bias;
  EXPECT_EQ(tmc_forward(x, zero, {1, 2, 3, 4}).value(),
            nn::relu(nn::conv_1x1(x, w.residual_weight, w.residual_bias)).value());

  EXPECT_THROW(register_tmc(reg, "q", 6, 8, rng), ConfigError);
  nn::ParamRegistry same;
  EXPECT_FALSE(register_tmc(same, "s", 6, 6, rng).projected);
  EXPECT_FALSE(same.find("s.residual.w"));
}

TEST(AngNetModel, ForwardIsTheCompositionOfItsStages) {
  const AngNet net(small_config(3), kinect25());
  std::mt19937_64 rng(7);
  const auto input = Node::constant(random_tensor({3, 6, 25, 2}, rng));
  const auto leaves = bind_constants(net.params());
  Node h = input;
  for (std::size_t blk = 0; blk < 3; ++blk) {
    h = net.smgc(blk, h, leaves);
    for (std::size_t u = 0; u < 3; ++u) h = net.tmc(blk, u, h, leaves);
  }
  const auto manual = nn::linear(nn::global_avg_pool(h), leaves[net.fc_weight()], leaves[net.fc_bias()]);
  EXPECT_EQ(net.forward(input, leaves).value(), manual.value());
}

TEST(AngNetModel, ParameterCountMatchesFormula) {
  for (std::size_t k : {1u, 2u, 4u}) {
    auto cfg = small_config(15);
    cfg.num_scales = k;
    const AngNet net(cfg, kinect25());
    EXPECT_EQ(net.num_params(), expected_param_count(cfg, 25));
  }
  // Hand count for K=1, C=3, widths 6/6/12, V=25, 3 classes.
  //   smgc: (3*6+6+625) + (6*6+6+625) + (6*12+12+625) = 649 + 667 + 709
  //   tmc(6):  6*(6+1)+12 = 54;  tmc(12): 6*(2*12+2)+24 = 180
  //   fc: 12*3+3 = 39
  auto cfg = small_config(3);
  cfg.num_scales = 1;
  EXPECT_EQ(expected_param_count(cfg, 25), 649u + 667u + 709u + 6 * 54u + 3 * 180u + 39u);
}

TEST(AngNetModel, DeterministicInSeed) {
  std::mt19937_64 rng(8);
  const auto f = encode(testing::random_clip(rng, 6, 25, 2), kinect25(), std::vector{FeatureKind::joint},
                        Stream::static_stream);
  const AngNet a(small_config(3), kinect25()), b(small_config(3), kinect25());
  EXPECT_EQ(a.logits(f), b.logits(f));
  auto other = small_config(3);
  other.seed = 1;
  EXPECT_NE(AngNet(other, kinect25()).logits(f), a.logits(f));
  const auto p = a.probabilities(f);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(a.predict(f), static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
}

TEST(AngNetModel, AngularOnlyLogitsIgnoreScaleAndPose) {
  std::mt19937_64 rng(9);
  const AngNet net(small_config(9), kinect25());
  const std::vector kinds = {FeatureKind::angular};
  for (int i = 0; i < 3; ++i) {
    const auto c = testing::random_clip(rng, 6, 25, 1);
    const auto base = net.logits(encode(c, kinect25(), kinds, Stream::static_stream));
    const auto moved = testing::transform(c, testing::random_rotation(rng), {1, 2, 3}, 2.5);
    const auto logits = net.logits(encode(moved, kinect25(), kinds, Stream::static_stream));
    EXPECT_LT(testing::max_abs_diff(base, logits), 1e-6);
  }
}

TEST(AngNetModel, InvariantToJointRelabelling) {
  std::mt19937_64 rng(10);
  std::vector<JointIndex> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto topo = permute_joints(kinect25(), perm);

  const auto c = testing::random_clip(rng, 5, 25, 2);
  Clip pc(5, 25, 2);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t v = 0; v < 25; ++v)
      for (std::size_t m = 0; m < 2; ++m) pc.at(t, static_cast<std::size_t>(perm[v]), m) = c.at(t, v, m);

  const auto kinds = parse_feature_list("joint,bone,angular");
  const AngNet a(small_config(15), kinect25()), b(small_config(15), topo);
  const auto la = a.logits(encode(c, kinect25(), kinds, Stream::static_stream));
  const auto lb = b.logits(encode(pc, topo, kinds, Stream::static_stream));
  EXPECT_LT(testing::max_abs_diff(la, lb), 1e-9);
}

TEST(AngNetModel, FiniteOnExtremeButValidInput) {
  const AngNet net(small_config(3), kinect25());
  FeatureTensor f({3, 4, 25, 1}, {"a", "b", "c"});
  for (auto& v : f.data()) v = 50.0;
  for (double z : net.logits(f)) EXPECT_TRUE(std::isfinite(z));
}

TEST(AngNetModel, RejectsWrongInput) {
  const AngNet net(small_config(9), kinect25());
  FeatureTensor f({3, 4, 25, 1}, {"a", "b", "c"});
  try {
    net.logits(f);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("C=9"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("C=3"), std::string::npos) << e.what();
  }
  FeatureTensor g({9, 4, 20, 1}, std::vector<std::string>(9, "x"));
  EXPECT_THROW(net.logits(g), ShapeError);
}

TEST(AngNetModel, ConfigValidation) {
  auto cfg = small_config(3);
  cfg.channels = {6, 8, 12};
  EXPECT_THROW(AngNet(cfg, kinect25()), ConfigError);
  cfg = small_config(3);
  cfg.num_classes = 1;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = small_config(3);
  cfg.dilations = {1, 1, 2, 3};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = small_config(3);
  cfg.num_scales = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(AngNetModel, MasksStartAtZero) {
  const AngNet net(small_config(3), kinect25());
  for (std::size_t blk = 0; blk < 3; ++blk)
    for (auto m : net.smgc_params(blk).mask)
      for (double v : net.params()[m].value.data()) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace angkit

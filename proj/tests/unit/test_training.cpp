#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "angkit/encoders.hpp"
#include "angkit/errors.hpp"
#include "angkit/synth.hpp"
#include "angkit/training.hpp"
#include "test_util.hpp"

namespace angkit {
namespace {

nn::ParamRegistry one_param(double value, double grad) {
  nn::ParamRegistry reg;
  reg.add("w", nn::Tensor({1}, {value}));
  reg[0].grad[0] = grad;
  return reg;
}

TEST(Sgd, FirstStepIsPlainGradientDescent) {
  auto reg = one_param(0.0, 1.0);
  sgd_step(reg, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(reg[0].value[0], -0.1);
  EXPECT_DOUBLE_EQ(reg[0].momentum[0], 1.0);
  EXPECT_EQ(reg[0].grad[0], 0.0);
}

TEST(Sgd, MomentumAccumulates) {
  auto reg = one_param(0.0, 1.0);
  sgd_step(reg, 1.0, 0.9);
  reg[0].grad[0] = 1.0;
  sgd_step(reg, 1.0, 0.9);
  EXPECT_DOUBLE_EQ(reg[0].value[0], -2.9);
  EXPECT_DOUBLE_EQ(reg[0].momentum[0], 1.9);
}

TEST(Sgd, ZeroGradientWithZeroMomentumIsANoOp) {
  auto reg = one_param(0.25, 0.0);
  sgd_step(reg, 0.5, 0.9);
  EXPECT_EQ(reg[0].value[0], 0.25);
}

TEST(Sgd, RejectsNonFiniteGradientsBeforeTouchingAnything) {
  nn::ParamRegistry reg;
  reg.add("a", nn::Tensor({1}, {1.0}));
  reg.add("b", nn::Tensor({1}, {2.0}));
  reg[0].grad[0] = 1.0;
  reg[1].grad[0] = std::nan("");
  try {
    sgd_step(reg, 0.1, 0.9);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  EXPECT_EQ(reg[0].value[0], 1.0);
  EXPECT_EQ(reg[0].momentum[0], 0.0);
}

TEST(ClipGradNorm, RescalesOnlyAboveTheThreshold) {
  nn::ParamRegistry reg;
  reg.add("a", nn::Tensor({1}));
  reg.add("b", nn::Tensor({1}));
  reg[0].grad[0] = 3.0;
  reg[1].grad[0] = 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm(reg, 10.0), 5.0);
  EXPECT_EQ(reg[0].grad[0], 3.0);
  EXPECT_DOUBLE_EQ(clip_grad_norm(reg, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(reg[0].grad[0], 0.6);
  EXPECT_DOUBLE_EQ(reg[1].grad[0], 0.8);
  reg[1].grad[0] = std::nan("");
  const double before = reg[0].grad[0];
  EXPECT_TRUE(std::isnan(clip_grad_norm(reg, 1.0)));
  EXPECT_EQ(reg[0].grad[0], before);
}

TEST(LrSchedule, StepDecay) {
  TrainConfig cfg;
  cfg.base_lr = 0.1;
  cfg.decay_epochs = {20, 30};
  cfg.decay_factor = 0.1;
  EXPECT_DOUBLE_EQ(lr_at(0, cfg), 0.1);
  EXPECT_DOUBLE_EQ(lr_at(19, cfg), 0.1);
  EXPECT_NEAR(lr_at(20, cfg), 0.01, 1e-15);
  EXPECT_NEAR(lr_at(29, cfg), 0.01, 1e-15);
  EXPECT_NEAR(lr_at(30, cfg), 0.001, 1e-15);
  EXPECT_NEAR(lr_at(1000, cfg), 0.001, 1e-15);
}

TEST(LrSchedule, NonIncreasingAndPiecewiseConstant) {
  TrainConfig cfg;
  cfg.decay_epochs = {3, 7, 8};
  cfg.decay_factor = 0.5;
  std::set<double> distinct;
  for (std::size_t e = 1; e < 20; ++e) {
    EXPECT_LE(lr_at(e, cfg), lr_at(e - 1, cfg));
    distinct.insert(lr_at(e - 1, cfg));
  }
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(TrainConfigValidation, Rejections) {
  TrainConfig cfg;
  validate(cfg);
  auto bad = cfg;
  bad.decay_factor = 1.0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.decay_epochs = {30, 20};
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.batch_size = 0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.momentum = 1.0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.base_lr = -1;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = cfg;
  bad.clip_norm = -1;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Synthetic, DeterministicAndInterleaved) {
  auto spec = elbow_confusable_spec();
  spec.frames = 4;
  const auto a = generate_synthetic(spec, 3, 11);
  const auto b = generate_synthetic(spec, 3, 11);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate_synthetic(spec, 3, 12));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].label, static_cast<int>(i % 2));
}

TEST(Synthetic, ClassesDifferOnlyBelowTheElbows) {
  const auto spec = elbow_confusable_spec();
  const auto z = draw_latent(spec, 5);
  const auto low = synthesize_clip(spec, 0, z), high = synthesize_clip(spec, 1, z);
  const std::set<std::size_t> forearm = {6, 7, 21, 22, 10, 11, 23, 24};
  bool any_diff = false;
  for (std::size_t t = 0; t < spec.frames; ++t)
    for (std::size_t v = 0; v < 25; ++v) {
      if (forearm.count(v)) {
        any_diff |= !(low.at(t, v, 0) == high.at(t, v, 0));
      } else {
        EXPECT_EQ(low.at(t, v, 0), high.at(t, v, 0)) << "joint " << v;
      }
    }
  EXPECT_TRUE(any_diff);
}

TEST(Synthetic, AngularFeaturesIgnoreBodyScale) {
  auto spec = elbow_confusable_spec();
  spec.noise_sigma = 0.0;
  auto z = draw_latent(spec, 9);
  const auto a = synthesize_clip(spec, 1, z);
  z.scale *= 2.0;
  const auto b = synthesize_clip(spec, 1, z);
  for (std::size_t i = 0; i < a.coords().size(); ++i) {
    EXPECT_NEAR(b.coords()[i].x, 2.0 * a.coords()[i].x, 1e-12);
  }
  const auto fa = angular_features(a, kinect25()), fb = angular_features(b, kinect25());
  EXPECT_LT(testing::max_abs_diff(fa.data(), fb.data()), 1e-9);
}

TEST(Synthetic, BonesKeepRestLengths) {
  auto spec = elbow_confusable_spec();
  spec.noise_sigma = 0.0;
  auto z = draw_latent(spec, 2);
  z.scale = 1.0;
  const auto c = synthesize_clip(spec, 0, z);
  const auto& off = kinect25_rest_offsets();
  const auto& topo = kinect25();
  for (std::size_t v = 0; v < 25; ++v) {
    if (!topo.bone_parent[v]) continue;
    const auto d = c.at(3, v, 0) - c.at(3, static_cast<std::size_t>(*topo.bone_parent[v]), 0);
    EXPECT_NEAR(std::sqrt(dot(d, d)), std::sqrt(dot(off[v], off[v])), 1e-12) << v;
  }
}

TEST(Synthetic, SpecValidation) {
  auto spec = elbow_confusable_spec();
  spec.classes.resize(1);
  EXPECT_THROW(validate(spec), ConfigError);
  spec = elbow_confusable_spec();
  spec.classes[0].tracks[0].axis = 3;
  EXPECT_THROW(validate(spec), ConfigError);
  spec = elbow_confusable_spec();
  spec.scale_min = 0;
  EXPECT_THROW(validate(spec), ConfigError);
}

AngNetConfig tiny(std::size_t in) {
  AngNetConfig cfg;
  cfg.in_channels = in;
  cfg.num_classes = 2;
  cfg.num_scales = 1;
  cfg.channels = {6, 6, 6};
  return cfg;
}

std::vector<Sample> tiny_data(std::size_t per_class, std::uint64_t seed) {
  auto spec = elbow_confusable_spec();
  spec.frames = 6;
  std::vector<Sample> out;
  for (const auto& c : generate_synthetic(spec, per_class, seed))
    out.push_back({encode(c, kinect25(), std::vector{FeatureKind::angular}, Stream::static_stream),
                   static_cast<std::size_t>(c.label)});
  return out;
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  AngNet net(tiny(9), kinect25());
  const AngNet before = net;
  TrainConfig cfg;
  cfg.base_lr = 0.0;
  cfg.epochs = 2;
  cfg.decay_epochs = {};
  TrainingMeta meta;
  const auto data = tiny_data(2, 1);
  const auto history = train(net, data, cfg, meta);
  ASSERT_EQ(history.size(), 2u);
  EXPECT_EQ(history[0].epoch, 1u);
  EXPECT_EQ(history[1].epoch, 2u);
  EXPECT_EQ(history[0].loss, history[1].loss);
  for (std::size_t i = 0; i < net.params().size(); ++i) EXPECT_EQ(net.params()[i].value, before.params()[i].value);
}

TEST(Train, OverfitsASingleSample) {
  AngNet net(tiny(9), kinect25());
  TrainConfig cfg;
  cfg.base_lr = 0.01;
  cfg.epochs = 60;
  cfg.decay_epochs = {};
  cfg.batch_size = 1;
  TrainingMeta meta;
  const auto data = tiny_data(1, 2);
  const std::vector<Sample> one = {data[0]};
  const auto history = train(net, one, cfg, meta);
  EXPECT_LT(history.back().loss, 0.1 * history.front().loss);
  EXPECT_EQ(history.back().accuracy, 1.0);
  EXPECT_EQ(meta.epochs_done, 60u);
}

TEST(Train, DeterministicAndLogged) {
  const auto data = tiny_data(2, 3);
  TrainConfig cfg;
  cfg.base_lr = 0.005;
  cfg.epochs = 2;
  cfg.decay_epochs = {1};
  cfg.batch_size = 3;
  AngNet a(tiny(9), kinect25()), b(tiny(9), kinect25());
  TrainingMeta ma, mb;
  std::ostringstream log;
  train(a, data, cfg, ma, &log);
  train(b, data, cfg, mb);
  EXPECT_EQ(ma, mb);
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].value, b.params()[i].value);
  EXPECT_EQ(log.str(), format_metrics(ma.history[0]) + "\n" + format_metrics(ma.history[1]) + "\n");
  EXPECT_EQ(log.str().rfind("epoch=1 lr=0.005 loss=", 0), 0u);
}

TEST(Train, RejectsBadInput) {
  AngNet net(tiny(9), kinect25());
  TrainingMeta meta;
  EXPECT_THROW(train(net, std::span<const Sample>{}, TrainConfig{}, meta), ConfigError);
  auto data = tiny_data(1, 4);
  data[0].label = 5;
  EXPECT_THROW(train(net, data, TrainConfig{}, meta), ConfigError);
  AngNet wide(tiny(3), kinect25());
  EXPECT_THROW(train(wide, tiny_data(1, 4), TrainConfig{}, meta), ShapeError);
}

TEST(Train, DivergenceIsReported) {
  AngNet net(tiny(9), kinect25());
  auto data = tiny_data(1, 5);
  data[1].features.data()[0] = std::nan("");
  TrainConfig cfg;
  cfg.epochs = 1;
  TrainingMeta meta;
  EXPECT_THROW(train(net, data, cfg, meta), NumericError);
}

TEST(Evaluate, ScoreAndConfusion) {
  const std::vector<std::size_t> pred = {0, 1, 1, 1}, truth = {0, 0, 1, 1};
  const auto e = score(pred, truth, 3);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(e.per_class[0], 0.5);
  EXPECT_DOUBLE_EQ(e.per_class[1], 1.0);
  EXPECT_TRUE(std::isnan(e.per_class[2]));
  EXPECT_EQ(format_confusion(e), "1 1 0\n0 2 0\n0 0 0\n");
}

TEST(Evaluate, AgreesWithPredict) {
  const AngNet net(tiny(9), kinect25());
  const auto data = tiny_data(3, 6);
  const auto e = evaluate(net, data);
  std::size_t correct = 0;
  for (const auto& s : data) correct += net.predict(s.features) == s.label;
  EXPECT_DOUBLE_EQ(e.accuracy, static_cast<double>(correct) / static_cast<double>(data.size()));
}

TEST(Ensemble, MeanProbabilityArgmax) {
  const std::vector<std::vector<double>> probs = {{0.9, 0.1}, {0.2, 0.8}};
  EXPECT_EQ(ensemble_predict(probs), 0u);
  const std::vector<std::vector<double>> reversed = {probs[1], probs[0]};
  EXPECT_EQ(ensemble_predict(reversed), 0u);
  const std::vector<std::vector<double>> tie = {{0.5, 0.5}};
  EXPECT_EQ(ensemble_predict(tie), 0u);
  EXPECT_THROW(ensemble_predict(std::span<const std::vector<double>>{}), ConfigError);
  const std::vector<std::vector<double>> ragged = {{0.5, 0.5}, {1.0}};
  EXPECT_THROW(ensemble_predict(ragged), ConfigError);
}

TEST(Ensemble, SingleMemberMatchesTheModel) {
  const AngNet net(tiny(9), kinect25());
  const auto data = tiny_data(3, 7);
  const std::vector<EnsembleMember> members = {{&net, data}};
  const auto e = evaluate_ensemble(members);
  const auto m = evaluate(net, data);
  EXPECT_EQ(e.accuracy, m.accuracy);
  EXPECT_EQ(e.confusion, m.confusion);
  const std::vector<EnsembleMember> twice = {{&net, data}, {&net, data}};
  EXPECT_EQ(evaluate_ensemble(twice).confusion, m.confusion);
}

}  // namespace
}  // namespace angkit

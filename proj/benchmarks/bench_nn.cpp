#include <benchmark/benchmark.h>

#include <random>

#include "angkit/angnet.hpp"
#include "angkit/nn/ops.hpp"
#include "angkit/nn/params.hpp"

namespace {

using namespace angkit;

nn::Tensor filled(nn::Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  nn::Tensor t(std::move(s));
  for (auto& v : t.data()) v = d(rng);
  return t;
}

void BM_Conv1x1(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = nn::Node::constant(filled({c, 32, 25, 2}, 1));
  const auto w = nn::Node::constant(filled({c, c}, 2));
  const auto b = nn::Node::constant(filled({c}, 3));
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv_1x1(x, w, b));
}
BENCHMARK(BM_Conv1x1)->Arg(24)->Arg(96);

void BM_AngNetForward(benchmark::State& state) {
  AngNetConfig cfg;
  cfg.in_channels = 12;
  const AngNet net(cfg, kinect25());
  FeatureTensor f({12, 32, 25, 2}, std::vector<std::string>(12, "c"));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  for (auto& v : f.data()) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.logits(f));
}
BENCHMARK(BM_AngNetForward)->Unit(benchmark::kMillisecond);

void BM_AngNetTrainStep(benchmark::State& state) {
  AngNetConfig cfg;
  cfg.in_channels = 12;
  AngNet net(cfg, kinect25());
  const auto input = nn::Node::constant(filled({12, 32, 25, 2}, 5));
  for (auto _ : state) {
    const auto leaves = nn::bind(net.params());
    const auto out = nn::softmax_cross_entropy(net.forward(input, leaves), 1);
    nn::backward(out.loss);
    benchmark::DoNotOptimize(leaves.front().grad());
  }
}
BENCHMARK(BM_AngNetTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

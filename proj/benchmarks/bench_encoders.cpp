#include <benchmark/benchmark.h>

#include <random>

#include "angkit/encoders.hpp"
#include "angkit/synth.hpp"

namespace {

using namespace angkit;

Clip sample_clip(std::size_t frames) {
  auto spec = elbow_confusable_spec();
  spec.frames = frames;
  spec.persons = 2;
  return synthesize_clip(spec, 0, draw_latent(spec, 1));
}

void BM_AngularFeatures(benchmark::State& state) {
  const auto clip = sample_clip(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(angular_features(clip, kinect25()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AngularFeatures)->Arg(32)->Arg(300);

void BM_EncodeAll(benchmark::State& state) {
  const auto clip = sample_clip(300);
  const auto kinds = parse_feature_list("joint,bone,angular");
  for (auto _ : state) benchmark::DoNotOptimize(encode(clip, kinect25(), kinds, Stream::velocity));
}
BENCHMARK(BM_EncodeAll);

}  // namespace

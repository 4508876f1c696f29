#include <benchmark/benchmark.h>

#include <random>

#include "sonoforge/chroma.hpp"
#include "sonoforge/dsp.hpp"
#include "sonoforge/layers.hpp"
#include "sonoforge/mel.hpp"
#include "sonoforge/model.hpp"
#include "sonoforge/rhythm.hpp"
#include "sonoforge/synth.hpp"

using namespace sonoforge;

namespace {

AudioClip noise_clip() {
  AudioClip c;
  c.sample_rate_hz = kCanonicalRateHz;
  c.samples.resize(110250);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& s : c.samples) s = u(rng);
  return c;
}

void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Complex> x(n);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = {u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(fft(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNLogN);

void BM_Stft(benchmark::State& state) {
  const auto clip = noise_clip();
  for (auto _ : state) benchmark::DoNotOptimize(stft(clip.samples, StftParams{}));
}
BENCHMARK(BM_Stft)->Unit(benchmark::kMillisecond);

template <FeatureKind Kind>
void BM_Feature(benchmark::State& state) {
  const auto clip = noise_clip();
  for (auto _ : state) benchmark::DoNotOptimize(extract_feature(clip, Kind));
}
BENCHMARK(BM_Feature<FeatureKind::Mel>)->Name("BM_Feature/mel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feature<FeatureKind::Mfcc>)->Name("BM_Feature/mfcc")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feature<FeatureKind::ChromaStft>)->Name("BM_Feature/chroma-stft")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feature<FeatureKind::ChromaCqt>)->Name("BM_Feature/chroma-cqt")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feature<FeatureKind::ChromaCens>)->Name("BM_Feature/chroma-cens")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feature<FeatureKind::Tempogram>)->Name("BM_Feature/tempogram")->Unit(benchmark::kMillisecond);

void BM_ConvForwardBackward(benchmark::State& state) {
  const auto ch = static_cast<std::size_t>(state.range(0));
  Conv2d<float> conv(ch, ch);
  Tensor x({8, 32, 54, ch}, 0.5f);
  Tensor dy({8, 32, 54, ch}, 0.1f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.forward(x));
    benchmark::DoNotOptimize(conv.backward(dy));
  }
}
BENCHMARK(BM_ConvForwardBackward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ModelTrainStep(benchmark::State& state) {
  ModelSpec spec;
  spec.input_height = static_cast<std::size_t>(state.range(0));
  Model model(spec);
  model.initialize(1);
  Tensor x({32, spec.input_height, spec.input_width, 1}, -40.0f);
  const std::vector<int> labels(32, 3);
  for (auto _ : state) {
    model.zero_grad();
    const auto r = softmax_xent(model.forward(x, Mode::Train, 1), std::span<const int>(labels));
    model.backward(r.grad);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ModelTrainStep)->Arg(128)->Arg(40)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

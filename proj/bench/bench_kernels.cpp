// Serial reference against the OpenMP path for each parallel kernel.
// Arg(0) is Exec::serial, Arg(1) is Exec::parallel.

#include <benchmark/benchmark.h>

#include "informed/features.hpp"
#include "informed/proposal.hpp"
#include "informed/renderers.hpp"

using namespace informed;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_RenderRoom(benchmark::State& state) {
  const RoomModel model(RoomOptions{});
  Rng rng(1);
  const ParamVector theta = model.prior_sample(rng);
  for (auto _ : state) benchmark::DoNotOptimize(render_room(theta, model.options(), exec_of(state)));
  label(state);
}

void BM_RenderTiles(benchmark::State& state) {
  const TilesModel model(TilesOptions{});
  Rng rng(2);
  const ParamVector theta = model.prior_sample(rng);
  for (auto _ : state) benchmark::DoNotOptimize(render_tiles(theta, model.options(), exec_of(state)));
  label(state);
}

void BM_Hog(benchmark::State& state) {
  const RoomModel model(RoomOptions{});
  Rng rng(3);
  const ImageGrid img = model.render(model.prior_sample(rng));
  for (auto _ : state) benchmark::DoNotOptimize(hog(img, {9, 20}, exec_of(state)));
  label(state);
}

void BM_KMeans(benchmark::State& state) {
  Rng fill(4);
  std::vector<double> pts(20000 * 64);
  for (auto& v : pts) v = fill.uniform();
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(kmeans(pts, 64, 100, rng, {20}, exec_of(state)));
  }
  label(state);
}

void BM_TrainingSet(benchmark::State& state) {
  RoomOptions opt;
  opt.width = opt.height = 64;
  const RoomModel model(opt);
  const HogExtractor hogx({64, 64, 1}, {9, 8});
  for (auto _ : state) benchmark::DoNotOptimize(generate_training_set(model, hogx, 500, 6, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_RenderRoom)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderTiles)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Hog)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeans)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainingSet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "membrane/membrane.hpp"
#include "support/scenes.hpp"

using namespace membrane;
using namespace membrane::testing;

static void BM_BuildTree(benchmark::State& st) {
  const Scene s = scene_b();
  for (auto _ : st) benchmark::DoNotOptimize(build_tree(s));
}
BENCHMARK(BM_BuildTree);

static void BM_ClassifyAndPredict1D(benchmark::State& st) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const auto oracle = make_analytic_oracle(s, t);
  for (auto _ : st) benchmark::DoNotOptimize(predict(s, t, ExponentQ(1, 2), Point::line(0.01), oracle));
}
BENCHMARK(BM_ClassifyAndPredict1D);

static void BM_Hitting2DFd(benchmark::State& st) {
  const Scene s = scene_d();
  const auto t = build_tree(s);
  HittingQuery q;
  q.ambient = "O";
  q.redistribution = {"A"};
  q.targets = {"B", "C"};
  q.start = Point::plane(0.5, 0.5);
  const double h = 1.0 / static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(hitting_2d_fd(s, t, q, h, false));
  st.SetLabel("cells per unit " + std::to_string(st.range(0)));
}
BENCHMARK(BM_Hitting2DFd)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_StepperX(benchmark::State& st) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  XSimConfig cfg;
  cfg.epsilon = 0.05;
  cfg.record_hits = false;
  std::uint64_t p = 0;
  std::uint64_t steps = 0;
  for (auto _ : st) steps += run_x_to_time(s, t, cfg, Point::line(0.425), 1.0, p++).steps;
  st.counters["steps"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_StepperX)->Unit(benchmark::kMillisecond);

static void BM_StepperY2D(benchmark::State& st) {
  const Scene s = scene_d();
  const auto t = build_tree(s);
  HittingQuery q;
  q.ambient = "O";
  q.redistribution = {"A"};
  q.targets = {"B", "C"};
  q.start = Point::plane(0.5, 0.5);
  YSimConfig cfg;
  std::uint64_t p = 0;
  for (auto _ : st) benchmark::DoNotOptimize(run_y_until_hit(s, t, q, cfg, p++));
}
BENCHMARK(BM_StepperY2D)->Unit(benchmark::kMillisecond);

static void BM_LatticeBuild(benchmark::State& st) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  for (auto _ : st) benchmark::DoNotOptimize(LatticePropagator1D(s, t, 0.02, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_LatticeBuild)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_LatticeSample(benchmark::State& st) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const LatticePropagator1D lat(s, t, 0.02, 400);
  for (auto _ : st) benchmark::DoNotOptimize(lat.sample(Point::line(0.675), 7.07, 100000, 1));
}
BENCHMARK(BM_LatticeSample)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

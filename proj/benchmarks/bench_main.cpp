#include <benchmark/benchmark.h>

#include <petc/sim.hpp>

#include <random>

#include "support/reactor.hpp"

using namespace petc;

namespace {

struct Loop1 {
  PlantLoop plant = testing::reactor_loop(0.1);
  TimingTables tables = timing_tables(plant);
  RegionSpec spec = effective_bounds(tables, 1e-3);
};

const Loop1& loop1() {
  static const Loop1 L;
  return L;
}

void bm_expm(benchmark::State& state) {
  const Mat A = testing::reactor_A();
  for (auto _ : state)
    benchmark::DoNotOptimize(matrix_exponential(A, 0.2));
}
BENCHMARK(bm_expm);

void bm_lqr(benchmark::State& state) {
  const Mat A = testing::reactor_A();
  const Mat B = testing::reactor_B();
  const Mat Q = Mat::Identity(4, 4);
  const Mat R = 0.1 * Mat::Identity(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(lqr_gain(A, B, Q, R));
}
BENCHMARK(bm_lqr);

void bm_timing_tables(benchmark::State& state) {
  const PlantLoop plant = testing::reactor_loop(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(timing_tables(plant));
}
BENCHMARK(bm_timing_tables);

void bm_region_of_state(benchmark::State& state) {
  const auto& L = loop1();
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  std::vector<Vec> xs(64, Vec(4));
  for (auto& x : xs)
    for (int d = 0; d < 4; ++d) x[d] = gauss(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        region_of_state(xs[i++ & 63], L.tables, L.spec));
  }
}
BENCHMARK(bm_region_of_state);

void bm_sdp_feasibility(benchmark::State& state) {
  const auto& L = loop1();
  const TraceLP p = assemble_transition_sdp(9, 12, L.tables, L.spec, 8.3e-5);
  for (auto _ : state) benchmark::DoNotOptimize(sdp_feasibility(p));
}
BENCHMARK(bm_sdp_feasibility);

const GameGraph& reactor_game() {
  static const GameGraph g = [] {
    SdpOptions opts;
    opts.allow_sub_miet_early = true;
    auto quotient = [&](double r_scale, int id) {
      const PlantLoop plant = testing::reactor_loop(r_scale);
      const TimingTables tables = timing_tables(plant);
      const RegionSpec spec = effective_bounds(tables, 1e-3);
      return build_tga(build_quotient(
          spec, transition_relation(tables, spec, opts),
          early_transition_relation(tables, spec, opts), id, plant.h));
    };
    return compose({quotient(0.1, 1), quotient(0.05, 2)},
                   build_network_tga(1), EarlinessParams{2, 1, 2});
  }();
  return g;
}

void bm_solve_safety(benchmark::State& state) {
  const auto& g = reactor_game();
  for (auto _ : state) benchmark::DoNotOptimize(solve_safety(g));
}
BENCHMARK(bm_solve_safety)->Unit(benchmark::kMillisecond);

void bm_simulate(benchmark::State& state) {
  const auto& g = reactor_game();
  static const Strategy st = solve_safety(g);
  SimConfig cfg;
  cfg.duration = Rational(1, 1);
  cfg.arbiter = ArbiterPolicy::RoundRobin;
  cfg.prefer_wait = false;
  for (double r : {0.1, 0.05}) {
    SimLoop sl;
    sl.plant = testing::reactor_loop(r);
    sl.tables = timing_tables(sl.plant);
    sl.spec = effective_bounds(sl.tables, 1e-3);
    sl.x0 = r == 0.1 ? (Vec(4) << 1, -1, 1, -1).finished()
                     : (Vec(4) << 1, 2, 3, 4).finished();
    cfg.loops.push_back(std::move(sl));
  }
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg, g, st));
}
BENCHMARK(bm_simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

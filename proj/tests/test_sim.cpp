#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <petc/sim.hpp>

#include <sstream>

#include "support/abstraction.hpp"
#include "support/rk4.hpp"

using namespace petc;

namespace {

// the published two-loop run: the arbiter takes every early slot the
// strategy offers, so the earliness budget paces interventions to about half
SimConfig reactor_sim_config() {
  SimConfig cfg;
  cfg.loops = reactor_sim_loops();
  cfg.duration = Rational{1, 1};
  cfg.arbiter = ArbiterPolicy::RoundRobin;
  cfg.seed = 0;
  cfg.prefer_wait = false;
  return cfg;
}

Mat reactor_P(int id) {
  const Mat Q = Mat::Identity(4, 4);
  const Mat R = (id == 1 ? 0.1 : 0.05) * Mat::Identity(2, 2);
  return lqr_gain(testing::reactor_A(), testing::reactor_B(), Q, R).P_care;
}

}  // namespace

TEST_CASE("a single loop runs open-schedule on its natural triggers") {
  const auto& f = reactor_fixture(1);
  EarlinessParams p{2, 1, 2};
  auto g = compose({f.tga}, build_network_tga(1), p);
  auto st = solve_safety(g);
  REQUIRE(st.success());

  SimConfig cfg;
  cfg.loops = {reactor_sim_loops()[0]};
  cfg.duration = Rational{1, 1};
  auto trace = simulate(cfg, g, st);

  CHECK(trace.ticks.size() == 101);
  CHECK(trace.conflicts.empty());
  CHECK(trace.violations.empty());
  REQUIRE(!trace.events.empty());
  CHECK(trace.events.front().kind == SimEvent::Bootstrap);
  CHECK(trace.events.front().tick == 0);
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    const auto& ev = trace.events[i];
    CHECK(ev.kind == SimEvent::Natural);  // nothing to arbitrate
    CHECK(ev.k == ev.source_region);
    // natural fires happen exactly one region-length after the previous one
    CHECK(ev.tick - trace.events[i - 1].tick ==
          static_cast<std::size_t>(trace.events[i - 1].target_region));
  }

  // the held input really is held: a fire at tick t-1 shows up in record t,
  // every other record repeats the previous xhat bit for bit
  for (std::size_t t = 1; t < trace.ticks.size(); ++t) {
    bool fired_before = false;
    for (const auto& ev : trace.events) fired_before |= ev.tick == t - 1;
    if (!fired_before)
      CHECK(trace.ticks[t].xhat[0] == trace.ticks[t - 1].xhat[0]);
  }
}

TEST_CASE("batch reactor pair: scheduled run is clean and matches the published shape") {
  auto trace = simulate(reactor_sim_config(), reactor_game(), reactor_strategy());

  CHECK(trace.ticks.size() == 101);
  CHECK(trace.conflicts.empty());
  CHECK(trace.violations.empty());
  CHECK(conflict_scan(trace).empty());

  // both loops bootstrap in id order on adjacent ticks
  REQUIRE(trace.events.size() >= 4);
  CHECK(trace.events[0].kind == SimEvent::Bootstrap);
  CHECK(trace.events[0].loop == 0);
  CHECK(trace.events[0].tick == 0);
  CHECK(trace.events[1].kind == SimEvent::Bootstrap);
  CHECK(trace.events[1].loop == 1);
  CHECK(trace.events[1].tick == 1);

  auto stats = trace_statistics(trace);
  CHECK(stats.total_events == trace.events.size());
  CHECK(stats.loops[0].natural + stats.loops[0].early >= 2);
  CHECK(stats.loops[1].natural + stats.loops[1].early >= 2);
  CHECK(stats.early_fraction >= 0.3);
  CHECK(stats.early_fraction <= 0.7);

  // the Lyapunov certificate of each loop decays across its own events
  for (int id : {1, 2}) {
    const Mat P = reactor_P(id);
    double prev = -1.0;
    for (const auto& ev : trace.events) {
      if (ev.loop != id - 1) continue;
      const Vec& x = trace.ticks[ev.tick].xi[id - 1];
      const double v = x.dot(P * x);
      if (prev >= 0.0) CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("the integrator matches an independent fine-step oracle") {
  auto trace = simulate(reactor_sim_config(), reactor_game(), reactor_strategy());
  const auto loops = reactor_sim_loops();
  // propagate a handful of ticks with RK4 at 1000 substeps per tick
  for (std::size_t t : {std::size_t{3}, std::size_t{17}, std::size_t{55},
                        std::size_t{90}}) {
    for (int l : {0, 1}) {
      const auto& a = trace.ticks[t];
      const auto& b = trace.ticks[t + 1];
      const int n = loops[l].plant.n();
      Mat F = Mat::Zero(2 * n, 2 * n);
      F.topLeftCorner(n, n) = loops[l].plant.A;
      F.topRightCorner(n, n) = loops[l].plant.B * loops[l].plant.K;
      // the hold over (t, t+1) is whatever xhat the next record carries:
      // a fire at tick t swaps it before any propagation happens
      Vec z(2 * n);
      z << a.xi[l], b.xhat[l];
      const Vec ref = testing::rk4_linear(F, z, 0.01, 1000).head(n);
      CHECK((b.xi[l] - ref).norm() <= 1e-8 * (1.0 + ref.norm()));
    }
  }
}

TEST_CASE("all arbiter policies stay conflict-free on the reactor pair") {
  for (auto pol : {ArbiterPolicy::RoundRobin, ArbiterPolicy::LowestLoopId,
                   ArbiterPolicy::SeededRandom}) {
    for (unsigned seed : {1u, 2u, 3u}) {
      auto cfg = reactor_sim_config();
      cfg.arbiter = pol;
      cfg.seed = seed;
      auto trace = simulate(cfg, reactor_game(), reactor_strategy());
      CHECK(trace.conflicts.empty());
      CHECK(trace.violations.empty());
      CHECK(conflict_scan(trace).empty());
      if (pol != ArbiterPolicy::SeededRandom) break;  // seed only matters here
    }
  }
}

TEST_CASE("the fewest-interventions default stays safe but rarely fires early") {
  auto lazy_cfg = reactor_sim_config();
  lazy_cfg.prefer_wait = true;
  auto lazy = simulate(lazy_cfg, reactor_game(), reactor_strategy());
  CHECK(lazy.conflicts.empty());
  CHECK(lazy.violations.empty());
  const double lazy_frac = trace_statistics(lazy).early_fraction;
  CHECK(lazy_frac < 0.3);

  auto eager = simulate(reactor_sim_config(), reactor_game(), reactor_strategy());
  CHECK(trace_statistics(eager).early_fraction >= lazy_frac);
}

TEST_CASE("simulation is bit-identical across reruns") {
  auto run = [] {
    auto cfg = reactor_sim_config();
    cfg.arbiter = ArbiterPolicy::SeededRandom;
    cfg.seed = 42;
    auto trace = simulate(cfg, reactor_game(), reactor_strategy());
    std::ostringstream t1, t2;
    write_trace_csv(t1, trace);
    write_events_csv(t2, trace);
    return t1.str() + t2.str();
  };
  const std::string a = run();
  const std::string b = run();
  CHECK(a == b);
  CHECK(a.find("tick,time,net,e") == 0);
}

TEST_CASE("conflict_scan flags overlapping holds") {
  SimTrace trace;
  trace.base_tick = Rational{1, 100};
  trace.delta = 3;
  trace.loop_count = 2;
  SimEvent a;
  a.tick = 5;
  a.loop = 0;
  SimEvent b;
  b.tick = 7;  // inside [5, 8)
  b.loop = 1;
  trace.events = {a, b};
  auto found = conflict_scan(trace);
  REQUIRE(found.size() == 1);
  CHECK(found[0].tick == 7);
  CHECK(found[0].loops == std::vector<int>{0, 1});

  trace.events[1].tick = 8;  // exactly released
  CHECK(conflict_scan(trace).empty());
}

TEST_CASE("entering a hopeless state is a hard error") {
  Strategy hopeless = reactor_strategy();
  std::fill(hopeless.winning.begin(), hopeless.winning.end(), 0);
  auto cfg = reactor_sim_config();
  cfg.duration = Rational{1, 10};
  CHECK_THROWS_AS(simulate(cfg, reactor_game(), hopeless),
                  std::runtime_error);
}

TEST_CASE("config validation catches mismatched inputs") {
  auto cfg = reactor_sim_config();
  cfg.loops.pop_back();
  CHECK_THROWS_AS(simulate(cfg, reactor_game(), reactor_strategy()),
                  std::invalid_argument);

  cfg = reactor_sim_config();
  cfg.loops[0].x0 = Vec::Ones(3);
  CHECK_THROWS_AS(simulate(cfg, reactor_game(), reactor_strategy()),
                  std::invalid_argument);

  cfg = reactor_sim_config();
  cfg.duration = Rational{-1, 1};
  CHECK_THROWS_AS(simulate(cfg, reactor_game(), reactor_strategy()),
                  std::invalid_argument);

  cfg = reactor_sim_config();
  cfg.duration = Rational{1, 3};  // not a whole number of ticks
  CHECK_THROWS_AS(simulate(cfg, reactor_game(), reactor_strategy()),
                  std::invalid_argument);
}

TEST_CASE("exact_inter_event_time mirrors the region map") {
  const auto loops = reactor_sim_loops();
  for (int l : {0, 1}) {
    const int q = region_of_state(loops[l].x0, loops[l].tables, loops[l].spec);
    CHECK(exact_inter_event_time(loops[l], loops[l].x0) == Rational{q, 100});
  }
}

TEST_CASE("statistics agree with the raw event log") {
  auto trace = simulate(reactor_sim_config(), reactor_game(), reactor_strategy());
  auto stats = trace_statistics(trace);
  std::size_t naturals = 0, earlies = 0, hist_total = 0, boots = 0;
  for (const auto& ev : trace.events) {
    if (ev.kind == SimEvent::Early) ++earlies;
    else ++naturals;
    if (ev.kind == SimEvent::Bootstrap) ++boots;
  }
  std::size_t got_nat = 0, got_early = 0;
  for (const auto& ls : stats.loops) {
    got_nat += ls.natural;
    got_early += ls.early;
    for (auto c : ls.earliness_hist) hist_total += c;
  }
  CHECK(got_nat == naturals);
  CHECK(got_early == earlies);
  CHECK(hist_total == trace.events.size() - boots);
  CHECK(stats.early_fraction ==
        doctest::Approx(static_cast<double>(earlies) / trace.events.size()));
}

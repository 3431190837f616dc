#include "petc/sim.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <sstream>

namespace petc {

namespace {

struct LoopRt {
  Mat E11, E12;   // one-tick propagator of (xi, xhat) with xhat held
  Vec xi, xhat;
  int region = 0;
  int clock = 0;
  int scale = 1;
  bool booted = false;
  std::size_t boot_tick = 0;
};

double tick_seconds(const Rational& r) {
  return static_cast<double>(r.num) / static_cast<double>(r.den);
}

}  // namespace

Rational exact_inter_event_time(const SimLoop& loop, const Vec& xhat) {
  const int q = region_of_state(xhat, loop.tables, loop.spec);
  return Rational{loop.plant.h.num * q, loop.plant.h.den};
}

SimTrace simulate(const SimConfig& cfg, const GameGraph& g,
                  const Strategy& st) {
  const std::size_t L = cfg.loops.size();
  if (L == 0 || L != g.loops.size())
    throw std::invalid_argument("simulate: loop count does not match game");
  if (st.winning.size() != g.num_states ||
      st.move_allowed.size() != g.move_list.size())
    throw std::invalid_argument("simulate: strategy does not fit game");
  if (!cfg.duration.positive() && cfg.duration.num != 0)
    throw std::invalid_argument("simulate: duration must be nonnegative");

  const std::int64_t T = rational_ratio(cfg.duration, g.base_tick);
  const double dt = tick_seconds(g.base_tick);

  std::vector<LoopRt> rt(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& sl = cfg.loops[l];
    const int n = sl.plant.n();
    if (sl.x0.size() != n)
      throw std::invalid_argument("simulate: x0 dimension mismatch");
    if (rational_ratio(sl.plant.h, g.base_tick) != g.loops[l].scale)
      throw std::invalid_argument("simulate: loop period does not match game");
    Mat aug = Mat::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = sl.plant.A;
    aug.topRightCorner(n, n) = sl.plant.B * sl.plant.K;
    const Mat E = matrix_exponential(aug, dt);
    if ((E.bottomLeftCorner(n, n).cwiseAbs().maxCoeff() > 1e-12) ||
        ((E.bottomRightCorner(n, n) - Mat::Identity(n, n))
             .cwiseAbs()
             .maxCoeff() > 1e-12))
      throw design_error("held-state propagator lost its hold structure");
    rt[l].E11 = E.topLeftCorner(n, n);
    rt[l].E12 = E.topRightCorner(n, n);
    rt[l].xi = sl.x0;
    rt[l].xhat = sl.x0;
    rt[l].region = region_of_state(sl.x0, sl.tables, sl.spec);
    rt[l].clock = 0;
    rt[l].scale = g.loops[l].scale;
    rt[l].booted = false;
    rt[l].boot_tick = l * static_cast<std::size_t>(g.delta);
  }

  SimTrace trace;
  trace.base_tick = g.base_tick;
  trace.delta = g.delta;
  trace.loop_count = L;
  trace.ticks.reserve(static_cast<std::size_t>(T) + 1);

  std::mt19937 rng(cfg.seed);
  std::size_t rr = 0;     // rotating arbiter pointer
  int net = 0;            // mirrors the game channel; -1 once wrecked
  int e = 0;
  bool free_run = false;  // no more scheduling after a conflict

  auto record = [&](std::size_t t) {
    TickRecord r;
    r.tick = t;
    r.time = static_cast<double>(t) * dt;
    r.net = net;
    r.e = e;
    for (const auto& lr : rt) {
      r.xi.push_back(lr.xi);
      r.xhat.push_back(lr.xhat);
      r.region.push_back(lr.region);
      r.clock.push_back(lr.clock);
    }
    trace.ticks.push_back(std::move(r));
  };

  for (std::size_t t = 0;; ++t) {
    record(t);
    if (static_cast<std::int64_t>(t) == T) break;

    // the channel releases before anything fires this tick
    if (net >= 1 && net - 1 == g.delta) net = 0;

    bool all_booted = true;
    for (const auto& lr : rt) all_booted &= lr.booted;

    struct Fire {
      int loop;
      SimEvent::Kind kind;
    };
    std::vector<Fire> fires;
    for (std::size_t l = 0; l < L; ++l) {
      if (!rt[l].booted) {
        if (t == rt[l].boot_tick) {
          fires.push_back({static_cast<int>(l), SimEvent::Bootstrap});
        } else if (rt[l].clock >= rt[l].region * rt[l].scale) {
          throw std::runtime_error(
              "simulate: loop " + std::to_string(l) +
              " comes due before its bootstrap slot");
        }
      } else if (rt[l].clock == rt[l].region * rt[l].scale) {
        fires.push_back({static_cast<int>(l), SimEvent::Natural});
      }
    }

    if (all_booted && !free_run) {
      GameState s;
      for (const auto& lr : rt) {
        s.region.push_back(lr.region);
        s.clock.push_back(lr.clock);
      }
      s.net = net;
      s.e = e;
      const std::size_t idx = g.encode(s);
      if (!st.winning[idx])
        throw std::runtime_error(
            "simulate: entered a state the strategy cannot win from (tick " +
            std::to_string(t) + ")");
      ++trace.strategy_queries;

      bool wait_ok = false;
      std::vector<int> early_ok;
      auto [mb, me] = g.moves_of(idx);
      for (std::uint32_t m = mb; m < me; ++m) {
        if (!st.move_allowed[m]) continue;
        if (g.move_list[m].kind == Move::Wait)
          wait_ok = true;
        else
          early_ok.push_back(g.move_list[m].loop);
      }
      const bool intervene =
          (!wait_ok || (!cfg.prefer_wait && !early_ok.empty()));
      if (intervene) {
        int pick;
        switch (cfg.arbiter) {
          case ArbiterPolicy::LowestLoopId:
            pick = *std::min_element(early_ok.begin(), early_ok.end());
            break;
          case ArbiterPolicy::SeededRandom:
            pick = early_ok[std::uniform_int_distribution<std::size_t>(
                0, early_ok.size() - 1)(rng)];
            break;
          case ArbiterPolicy::RoundRobin:
          default: {
            pick = early_ok.front();
            std::size_t best = L;
            for (int cand : early_ok) {
              const std::size_t d = (static_cast<std::size_t>(cand) + L - rr) % L;
              if (d < best) {
                best = d;
                pick = cand;
              }
            }
            rr = (static_cast<std::size_t>(pick) + 1) % L;
            break;
          }
        }
        fires.push_back({pick, SimEvent::Early});
      }
    }

    if (!fires.empty()) {
      if (fires.size() >= 2 || net != 0) {
        SimConflict c;
        c.tick = t;
        c.time = static_cast<double>(t) * dt;
        for (const auto& f : fires) c.loops.push_back(f.loop);
        trace.conflicts.push_back(std::move(c));
        free_run = true;
        net = -1;  // wrecked: stays busy forever
      }
      for (const auto& f : fires) {
        auto& lr = rt[static_cast<std::size_t>(f.loop)];
        const int q_old = lr.region;
        const int k = f.kind == SimEvent::Bootstrap ? 0 : lr.clock / lr.scale;

        if (f.kind != SimEvent::Bootstrap) {
          // accumulated drift check against the one-shot event map
          const Mat& Mk = cfg.loops[f.loop].tables.M[k - 1];
          const double err = (lr.xi - Mk * lr.xhat).norm();
          if (err > 1e-9 * (1.0 + lr.xi.norm())) {
            std::ostringstream os;
            os << "tick " << t << " loop " << f.loop
               << ": propagated state drifted " << err
               << " from the event map";
            trace.violations.push_back(os.str());
          }
          if (fires.size() == 1 && !free_run)
            e = earliness_update(e, q_old, k, g.params);
        }

        lr.xhat = lr.xi;
        lr.region = region_of_state(lr.xhat, cfg.loops[f.loop].tables,
                                    cfg.loops[f.loop].spec);
        lr.clock = 0;
        lr.booted = true;

        if (f.kind != SimEvent::Bootstrap) {
          // the landing region must be a quotient edge of the fired time
          const auto& dims = g.loops[f.loop];
          const auto& succ =
              f.kind == SimEvent::Early
                  ? dims.early[q_old - dims.k_min][k - 1]
                  : dims.trigger[q_old - dims.k_min];
          if (!std::binary_search(succ.begin(), succ.end(), lr.region)) {
            std::ostringstream os;
            os << "tick " << t << " loop " << f.loop << ": fired at k=" << k
               << " from region " << q_old << " into region " << lr.region
               << " which the quotient does not allow";
            trace.violations.push_back(os.str());
          }
        }

        SimEvent ev;
        ev.tick = t;
        ev.time = static_cast<double>(t) * dt;
        ev.loop = f.loop;
        ev.kind = f.kind;
        ev.k = k;
        ev.source_region = q_old;
        ev.target_region = lr.region;
        trace.events.push_back(ev);
      }
      if (net == 0) net = 1;  // taken this tick; advances to c_N = 1 below
    }

    for (auto& lr : rt) {
      lr.xi = (lr.E11 * lr.xi + lr.E12 * lr.xhat).eval();
      lr.clock += 1;
    }
    if (net >= 1) net += 1;
  }

  return trace;
}

std::vector<SimConflict> conflict_scan(const SimTrace& trace) {
  std::vector<SimConflict> out;
  const auto hold = static_cast<std::size_t>(trace.delta);
  for (std::size_t i = 0; i + 1 < trace.events.size(); ++i) {
    const auto& a = trace.events[i];
    // events are time-ordered; only later events can overlap a's hold
    for (std::size_t j = i + 1; j < trace.events.size(); ++j) {
      const auto& b = trace.events[j];
      if (b.tick >= a.tick + hold) break;
      SimConflict c;
      c.tick = b.tick;
      c.time = b.time;
      c.loops = {a.loop, b.loop};
      out.push_back(std::move(c));
    }
  }
  return out;
}

TraceStats trace_statistics(const SimTrace& trace) {
  TraceStats stats;
  stats.loops.resize(trace.loop_count);
  std::vector<double> last_time(trace.loop_count, -1.0);
  std::vector<double> gap_sum(trace.loop_count, 0.0);
  std::vector<std::size_t> gap_cnt(trace.loop_count, 0);

  for (const auto& ev : trace.events) {
    auto& ls = stats.loops[static_cast<std::size_t>(ev.loop)];
    ls.loop = ev.loop;
    if (ev.kind == SimEvent::Early) {
      ++ls.early;
    } else {
      ++ls.natural;
    }
    if (ev.kind != SimEvent::Bootstrap) {
      const std::size_t gap =
          static_cast<std::size_t>(ev.source_region - ev.k);
      if (ls.earliness_hist.size() <= gap) ls.earliness_hist.resize(gap + 1);
      ++ls.earliness_hist[gap];
    }
    if (last_time[ev.loop] >= 0.0) {
      gap_sum[ev.loop] += ev.time - last_time[ev.loop];
      ++gap_cnt[ev.loop];
    }
    last_time[ev.loop] = ev.time;
    ++stats.total_events;
  }
  std::size_t early_total = 0;
  for (std::size_t l = 0; l < trace.loop_count; ++l) {
    auto& ls = stats.loops[l];
    ls.loop = static_cast<int>(l);
    if (gap_cnt[l] > 0) ls.mean_inter_event = gap_sum[l] / gap_cnt[l];
    early_total += ls.early;
  }
  if (stats.total_events > 0)
    stats.early_fraction =
        static_cast<double>(early_total) / stats.total_events;
  return stats;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "tick,time,net,e";
  if (!trace.ticks.empty()) {
    for (std::size_t l = 0; l < trace.loop_count; ++l) {
      const auto n = trace.ticks.front().xi[l].size();
      for (int i = 0; i < n; ++i) out << ",xi" << l << '_' << i;
      for (int i = 0; i < n; ++i) out << ",xhat" << l << '_' << i;
      out << ",region" << l << ",clock" << l;
    }
  }
  out << '\n';
  out.precision(17);
  for (const auto& r : trace.ticks) {
    out << r.tick << ',' << r.time << ',' << r.net << ',' << r.e;
    for (std::size_t l = 0; l < trace.loop_count; ++l) {
      for (int i = 0; i < r.xi[l].size(); ++i) out << ',' << r.xi[l](i);
      for (int i = 0; i < r.xhat[l].size(); ++i) out << ',' << r.xhat[l](i);
      out << ',' << r.region[l] << ',' << r.clock[l];
    }
    out << '\n';
  }
}

void write_events_csv(std::ostream& out, const SimTrace& trace) {
  out << "tick,time,loop,kind,k,source_region,target_region\n";
  out.precision(17);
  for (const auto& ev : trace.events) {
    const char* kind = ev.kind == SimEvent::Natural
                           ? "natural"
                           : (ev.kind == SimEvent::Early ? "early"
                                                         : "bootstrap");
    out << ev.tick << ',' << ev.time << ',' << ev.loop << ',' << kind << ','
        << ev.k << ',' << ev.source_region << ',' << ev.target_region << '\n';
  }
}

}  // namespace petc

#pragma once

#include "petc/synth.hpp"

namespace petc {

struct SimLoop {
  PlantLoop plant;
  TimingTables tables;
  RegionSpec spec;
  Vec x0;
};

enum class ArbiterPolicy { RoundRobin, LowestLoopId, SeededRandom };

struct SimConfig {
  std::vector<SimLoop> loops;
  Rational duration;  // must be a multiple of the game's base tick
  ArbiterPolicy arbiter = ArbiterPolicy::RoundRobin;
  unsigned seed = 0;
  // wait whenever the strategy permits it (fewest interventions); turning
  // this off makes the arbiter grab every allowed early slot
  bool prefer_wait = true;
};

struct SimEvent {
  enum Kind { Natural, Early, Bootstrap };
  std::size_t tick = 0;
  double time = 0.0;
  int loop = 0;
  Kind kind = Natural;
  int k = 0;  // periods since this loop's previous communication
  int source_region = 0;
  int target_region = 0;
};

// state at time tick*base_tick, sampled before that tick's communications
struct TickRecord {
  std::size_t tick = 0;
  double time = 0.0;
  std::vector<Vec> xi;
  std::vector<Vec> xhat;
  std::vector<int> region;
  std::vector<int> clock;
  int net = 0;  // -1 once the channel has been wrecked by a conflict
  int e = 0;
};

struct SimConflict {
  std::size_t tick = 0;
  double time = 0.0;
  std::vector<int> loops;
};

struct SimTrace {
  Rational base_tick;
  int delta = 1;
  std::size_t loop_count = 0;
  std::vector<TickRecord> ticks;
  std::vector<SimEvent> events;
  std::vector<SimConflict> conflicts;
  // quotient-conformance and drift re-check failures; empty on a sound run
  std::vector<std::string> violations;
  std::size_t strategy_queries = 0;
};

// closed-loop run of the continuous plants under the synthesized scheduler;
// bit-identical for identical inputs. Throws when the run enters a state the
// strategy cannot win from (or a loop comes due before its bootstrap slot).
SimTrace simulate(const SimConfig& cfg, const GameGraph& g, const Strategy& st);

// recomputes channel occupancy [t, t + delta*base_tick) from the event log
// alone and reports overlaps; independent of the simulator's own bookkeeping
std::vector<SimConflict> conflict_scan(const SimTrace& trace);

// time until the trigger would fire on its own from held state xhat
Rational exact_inter_event_time(const SimLoop& loop, const Vec& xhat);

struct LoopStats {
  int loop = 0;
  std::size_t natural = 0;  // includes the bootstrap communication
  std::size_t early = 0;
  double mean_inter_event = 0.0;         // time units between communications
  std::vector<std::size_t> earliness_hist;  // index: periods fired early
};

struct TraceStats {
  std::vector<LoopStats> loops;
  std::size_t total_events = 0;
  double early_fraction = 0.0;
};

TraceStats trace_statistics(const SimTrace& trace);

void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_events_csv(std::ostream& out, const SimTrace& trace);

}  // namespace petc

#pragma once

#include "petc/sdp.hpp"

namespace petc {

// finite quotient of one loop's communication traffic: states are the regions
// [k_min, k_max], the output of region k is k (its inter-event time), and the
// edge sets come from the relaxation oracle.
struct TrafficModel {
  int loop_id = 0;
  int k_min = 1;
  int k_max = 1;
  Rational h;
  std::vector<Edge> trigger_edges;  // (i, i, j)
  std::vector<Edge> early_edges;    // (i, k, j), k < i

  int region_count() const { return k_max - k_min + 1; }
  int output(int region) const { return region; }
};

struct TgaEdge {
  int source = 0;      // region
  int guard = 0;       // clock equality c == guard
  int target = 0;      // region
  bool controllable = false;
};

// one-clock timed game automaton over the quotient: locations are regions
// with invariant c <= region, early edges are the controller's, trigger edges
// the environment's, and every edge resets c.
struct TrafficTGA {
  int loop_id = 0;
  int k_min = 1;
  int k_max = 1;
  Rational h;
  std::vector<TgaEdge> edges;

  int invariant(int region) const { return region; }
};

// throws abstraction_error when some region has no outgoing trigger edge:
// the concrete system always evolves, so a dead region means the relation
// computation went wrong
TrafficModel build_quotient(const RegionSpec& spec,
                            std::vector<Edge> trigger_edges,
                            std::vector<Edge> early_edges, int loop_id,
                            Rational h);

TrafficTGA build_tga(const TrafficModel& model);

void dump_traffic_json(std::ostream& out, const TrafficModel& model);

// inverse of dump_traffic_json; throws std::invalid_argument on missing
// fields, bad shapes or edges outside [k_min, k_max]
TrafficModel load_traffic_json(std::istream& in);

}  // namespace petc

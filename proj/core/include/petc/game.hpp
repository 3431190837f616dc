#pragma once

#include <cstdint>

#include "petc/traffic.hpp"

namespace petc {

// shared-channel automaton: Idle, InUse (occupied for delta ticks, released
// by `done` at c_N = delta), Bad (any communication that finds the channel
// occupied, or two in the same tick)
struct NetworkTGA {
  int delta = 1;
};

struct NetEdge {
  const char* from;
  const char* to;
  const char* action;  // "comm" or "done"
  bool guard_at_delta; // c_N == delta
  bool resets_clock;
};

NetworkTGA build_network_tga(int delta);
std::vector<NetEdge> network_edges(const NetworkTGA& net);

struct EarlinessParams {
  int r = 1;      // cost rate per period of earliness
  int e_ref = 1;  // discount per communication
  int E = 1;      // saturation / unsafety bound
  void validate() const;
};

// e' = clamp(e + r*(i - k) - e_ref) into [0, E]: firing k = i is the natural
// trigger and only pays the discount, earlier fires accumulate
int earliness_update(int e, int i, int k, const EarlinessParams& params);

struct GameState {
  std::vector<int> region;  // per loop
  std::vector<int> clock;   // per loop, in base ticks since last fire
  int net = 0;              // 0 Idle, 1..delta+1 InUse with c_N = net-1, last Bad
  int e = 0;
};

struct Move {
  enum Kind { Wait = 0, Early = 1 };
  int kind = Wait;
  int loop = -1;  // fired loop for Early

  friend bool operator==(const Move& a, const Move& b) {
    return a.kind == b.kind && (a.kind == Move::Wait || a.loop == b.loop);
  }
};

// fully enumerated two-player safety game over the product of the loop TGAs,
// the network automaton and the earliness counter, under one-tick-at-a-time
// semantics (every guard is an integer number of base ticks, so this loses
// nothing). Controller picks wait or one enabled early fire; overdue loops
// fire on their own; the environment resolves successor regions.
struct GameGraph {
  struct LoopDims {
    int k_min = 0;
    int k_max = 0;
    int scale = 1;  // h / base_tick
    std::vector<std::uint32_t> pair_offset;  // (region, clock) ranking
    std::uint32_t pair_count = 0;
    // successor regions by firing time: trigger[q-k_min], early[q-k_min][k-1]
    std::vector<std::vector<int>> trigger;
    std::vector<std::vector<std::vector<int>>> early;
  };

  std::vector<LoopDims> loops;
  int delta = 1;
  EarlinessParams params;
  Rational base_tick;
  std::size_t num_states = 0;

  // flattened move/successor tables
  std::vector<std::uint32_t> move_begin;  // num_states + 1
  std::vector<Move> move_list;
  std::vector<std::uint32_t> succ_begin;  // move_list.size() + 1
  std::vector<std::uint32_t> succ_list;

  int net_values() const { return delta + 3; }
  int bad_net() const { return delta + 2; }

  std::size_t encode(const GameState& s) const;
  GameState decode(std::size_t idx) const;
  bool unsafe(std::size_t idx) const;

  std::pair<std::uint32_t, std::uint32_t> moves_of(std::size_t idx) const {
    return {move_begin[idx], move_begin[idx + 1]};
  }
  std::pair<std::uint32_t, std::uint32_t> outcomes_of(std::uint32_t mv) const {
    return {succ_begin[mv], succ_begin[mv + 1]};
  }
};

struct GameStats {
  std::size_t states = 0;
  std::size_t moves = 0;
  std::size_t outcomes = 0;
  std::size_t unsafe_states = 0;
};

GameGraph compose(const std::vector<TrafficTGA>& tgas, const NetworkTGA& net,
                  const EarlinessParams& params, Rational base_tick);
// base tick defaulted to the gcd of the loop periods
GameGraph compose(const std::vector<TrafficTGA>& tgas, const NetworkTGA& net,
                  const EarlinessParams& params);

// environment-resolved outcomes of one controller move; throws if the move is
// not enabled in s
std::vector<GameState> successors(const GameGraph& g, const GameState& s,
                                  const Move& move);

GameStats game_stats(const GameGraph& g);
void print_game_stats(std::ostream& out, const GameStats& s);

}  // namespace petc

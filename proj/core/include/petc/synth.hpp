#pragma once

#include <iosfwd>

#include "petc/game.hpp"

namespace petc {

// maximally permissive safety strategy: the winning set plus, for each
// winning state, every controller move whose outcomes all stay winning
struct Strategy {
  std::vector<std::uint8_t> winning;       // per state
  std::vector<std::uint8_t> move_allowed;  // aligned with GameGraph::move_list
  std::vector<std::size_t> losing_initial;
  std::size_t winning_count = 0;

  bool success() const { return losing_initial.empty(); }
};

// all joint regions with fresh clocks, idle channel and zero earliness
std::vector<std::size_t> initial_states(const GameGraph& g);

// greatest fixed point of "some move keeps every environment outcome inside";
// synthesis failure (some initial state losing) is reported in the result,
// not thrown
Strategy solve_safety(const GameGraph& g);

// allowed moves at s; throws std::invalid_argument outside the winning set
std::vector<Move> strategy_query(const Strategy& st, const GameGraph& g,
                                 const GameState& s);

struct VerifyReport {
  std::size_t checked_states = 0;
  std::size_t reachable_from_initial = 0;
  std::size_t empty_allowed = 0;     // winning states left without a move
  std::size_t escaping_moves = 0;    // allowed moves with an outcome outside
  std::size_t unsafe_winning = 0;    // unsafe states marked winning
  bool ok() const {
    return empty_allowed == 0 && escaping_moves == 0 && unsafe_winning == 0;
  }
};

// independent re-traversal: every winning state must be safe, keep at least
// one allowed move, and every allowed move must stay inside the winning set
VerifyReport verify_strategy(const GameGraph& g, const Strategy& st);

// line format: one record per winning state,
//   regions <q...> clocks <c...> net <idle|inuse:C|bad> e <v> : <moves>
// with moves "wait" or "early:<loop>"
void write_strategy(std::ostream& out, const GameGraph& g, const Strategy& st);
Strategy read_strategy(std::istream& in, const GameGraph& g);

}  // namespace petc

#include "petc/game.hpp"

#include <algorithm>

namespace petc {

NetworkTGA build_network_tga(int delta) {
  if (delta < 1) throw std::invalid_argument("delta must be at least 1");
  return NetworkTGA{delta};
}

std::vector<NetEdge> network_edges(const NetworkTGA&) {
  return {
      {"Idle", "InUse", "comm", false, true},
      {"InUse", "Idle", "done", true, false},
      {"InUse", "Bad", "comm", false, false},
      {"Bad", "Bad", "comm", false, false},
  };
}

void EarlinessParams::validate() const {
  // E = 0 is legal: it makes every state unsafe, so synthesis reports the
  // failure instead of the config being rejected up front
  if (r < 1 || e_ref < 0 || E < 0)
    throw std::invalid_argument("earliness parameters out of range");
}

int earliness_update(int e, int i, int k, const EarlinessParams& params) {
  if (k < 1 || k > i) throw std::invalid_argument("fire time must be in [1,i]");
  if (e < 0 || e > params.E) throw std::invalid_argument("e out of range");
  return std::max(0, std::min(params.E, e + params.r * (i - k) - params.e_ref));
}

std::size_t GameGraph::encode(const GameState& s) const {
  if (s.region.size() != loops.size() || s.clock.size() != loops.size())
    throw std::invalid_argument("state arity mismatch");
  std::size_t idx = 0;
  for (std::size_t l = 0; l < loops.size(); ++l) {
    const auto& d = loops[l];
    if (s.region[l] < d.k_min || s.region[l] > d.k_max)
      throw std::invalid_argument("region out of range");
    const int bound = s.region[l] * d.scale;
    if (s.clock[l] < 0 || s.clock[l] > bound)
      throw std::invalid_argument("clock out of range");
    idx = idx * d.pair_count + d.pair_offset[s.region[l] - d.k_min] +
          static_cast<std::uint32_t>(s.clock[l]);
  }
  if (s.net < 0 || s.net >= net_values())
    throw std::invalid_argument("network location out of range");
  if (s.e < 0 || s.e > params.E)
    throw std::invalid_argument("earliness out of range");
  idx = idx * net_values() + static_cast<std::size_t>(s.net);
  idx = idx * (params.E + 1) + static_cast<std::size_t>(s.e);
  return idx;
}

GameState GameGraph::decode(std::size_t idx) const {
  GameState s;
  s.e = static_cast<int>(idx % (params.E + 1));
  idx /= params.E + 1;
  s.net = static_cast<int>(idx % net_values());
  idx /= net_values();
  s.region.resize(loops.size());
  s.clock.resize(loops.size());
  for (std::size_t l = loops.size(); l-- > 0;) {
    const auto& d = loops[l];
    const auto pair = static_cast<std::uint32_t>(idx % d.pair_count);
    idx /= d.pair_count;
    // pair_offset is increasing; find the region bucket
    const auto it = std::upper_bound(d.pair_offset.begin(),
                                     d.pair_offset.end(), pair);
    const int q = d.k_min + static_cast<int>(it - d.pair_offset.begin()) - 1;
    s.region[l] = q;
    s.clock[l] = static_cast<int>(pair - d.pair_offset[q - d.k_min]);
  }
  return s;
}

bool GameGraph::unsafe(std::size_t idx) const {
  const int e = static_cast<int>(idx % (params.E + 1));
  const int net = static_cast<int>((idx / (params.E + 1)) % net_values());
  return net == bad_net() || e >= params.E;
}

namespace {

// one-tick outcome resolution shared by composition and the public query.
// fires = forced loops plus an optional early loop; returns successor indices
void resolve_outcomes(const GameGraph& g, const GameState& s,
                      const std::vector<int>& fires, int early_loop,
                      std::vector<std::uint32_t>* out) {
  out->clear();
  const int n_loops = static_cast<int>(g.loops.size());

  // channel release happens before this tick's communications
  int net = s.net;
  if (net >= 1 && net <= g.delta + 1 && net - 1 == g.delta) net = 0;

  if (fires.empty()) {
    GameState t = s;
    for (int l = 0; l < n_loops; ++l) t.clock[l] += 1;
    t.net = net == 0 ? 0 : net + 1;
    out->push_back(static_cast<std::uint32_t>(g.encode(t)));
    return;
  }

  if (fires.size() >= 2 || net != 0) {
    // collision: channel occupied or two comms in one tick
    GameState bad;
    bad.region.resize(n_loops);
    bad.clock.assign(n_loops, 0);
    for (int l = 0; l < n_loops; ++l) bad.region[l] = g.loops[l].k_min;
    bad.net = g.bad_net();
    bad.e = 0;
    out->push_back(static_cast<std::uint32_t>(g.encode(bad)));
    return;
  }

  const int l = fires.front();
  const auto& d = g.loops[l];
  const int i = s.region[l];
  const int k = s.clock[l] / d.scale;
  const int e2 = earliness_update(s.e, i, k, g.params);
  const std::vector<int>& succ =
      (l == early_loop) ? d.early[i - d.k_min][k - 1] : d.trigger[i - d.k_min];

  GameState t = s;
  t.e = e2;
  t.net = 2;  // comm: InUse with c_N = 0, advanced to 1 by the tick
  t.clock[l] = 0;
  for (int q = 0; q < n_loops; ++q) t.clock[q] += 1;
  for (int j : succ) {
    t.region[l] = j;
    out->push_back(static_cast<std::uint32_t>(g.encode(t)));
  }
}

void enumerate_moves(const GameGraph& g, const GameState& s,
                     std::vector<int>* forced, std::vector<Move>* moves) {
  forced->clear();
  moves->clear();
  const int n_loops = static_cast<int>(g.loops.size());
  for (int l = 0; l < n_loops; ++l)
    if (s.clock[l] == s.region[l] * g.loops[l].scale) forced->push_back(l);

  moves->push_back(Move{Move::Wait, -1});
  for (int l = 0; l < n_loops; ++l) {
    const auto& d = g.loops[l];
    if (s.clock[l] == s.region[l] * d.scale) continue;  // trigger wins
    if (s.clock[l] <= 0 || s.clock[l] % d.scale != 0) continue;
    const int k = s.clock[l] / d.scale;
    if (k >= s.region[l]) continue;
    if (d.early[s.region[l] - d.k_min][k - 1].empty()) continue;
    moves->push_back(Move{Move::Early, l});
  }
}

}  // namespace

GameGraph compose(const std::vector<TrafficTGA>& tgas, const NetworkTGA& net,
                  const EarlinessParams& params, Rational base_tick) {
  if (tgas.empty()) throw std::invalid_argument("need at least one loop");
  if (net.delta < 1) throw std::invalid_argument("delta must be at least 1");
  params.validate();
  if (!base_tick.positive())
    throw std::invalid_argument("base tick must be positive");

  GameGraph g;
  g.delta = net.delta;
  g.params = params;
  g.base_tick = base_tick;

  std::size_t total = 1;
  for (const auto& tga : tgas) {
    GameGraph::LoopDims d;
    d.k_min = tga.k_min;
    d.k_max = tga.k_max;
    const std::int64_t scale = rational_ratio(tga.h, base_tick);
    if (scale > 1000000) throw std::invalid_argument("base tick too fine");
    d.scale = static_cast<int>(scale);

    const int R = tga.k_max - tga.k_min + 1;
    d.trigger.assign(R, {});
    d.early.assign(R, {});
    for (int q = tga.k_min; q <= tga.k_max; ++q)
      d.early[q - tga.k_min].assign(std::max(0, q - 1), {});
    for (const auto& e : tga.edges) {
      if (e.source < tga.k_min || e.source > tga.k_max || e.target < tga.k_min ||
          e.target > tga.k_max)
        throw std::invalid_argument("TGA edge out of range");
      if (e.controllable) {
        if (e.guard < 1 || e.guard >= e.source)
          throw std::invalid_argument("early edge guard must be below source");
        d.early[e.source - tga.k_min][e.guard - 1].push_back(e.target);
      } else {
        if (e.guard != e.source)
          throw std::invalid_argument("trigger edge guard must equal source");
        d.trigger[e.source - tga.k_min].push_back(e.target);
      }
    }
    for (auto& v : d.trigger) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      if (v.empty())
        throw abstraction_error("loop has a region with no trigger successor");
    }
    for (auto& per_q : d.early)
      for (auto& v : per_q) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }

    d.pair_offset.resize(R);
    std::uint32_t off = 0;
    for (int q = tga.k_min; q <= tga.k_max; ++q) {
      d.pair_offset[q - tga.k_min] = off;
      off += static_cast<std::uint32_t>(q * d.scale + 1);
    }
    d.pair_count = off;
    total *= off;
    g.loops.push_back(std::move(d));
  }
  total *= static_cast<std::size_t>(g.net_values());
  total *= static_cast<std::size_t>(params.E + 1);
  if (total > (std::size_t{1} << 31))
    throw std::invalid_argument("composed game too large");
  g.num_states = total;

  g.move_begin.resize(total + 1);
  g.succ_begin.clear();
  g.succ_begin.push_back(0);

  std::vector<int> forced;
  std::vector<Move> moves;
  std::vector<std::uint32_t> outs;
  for (std::size_t idx = 0; idx < total; ++idx) {
    g.move_begin[idx] = static_cast<std::uint32_t>(g.move_list.size());
    if (g.unsafe(idx)) {
      // absorbing: losing states need no real dynamics
      g.move_list.push_back(Move{Move::Wait, -1});
      g.succ_list.push_back(static_cast<std::uint32_t>(idx));
      g.succ_begin.push_back(static_cast<std::uint32_t>(g.succ_list.size()));
      continue;
    }
    const GameState s = g.decode(idx);
    enumerate_moves(g, s, &forced, &moves);
    for (const auto& m : moves) {
      std::vector<int> fires = forced;
      if (m.kind == Move::Early) fires.push_back(m.loop);
      resolve_outcomes(g, s, fires, m.kind == Move::Early ? m.loop : -1,
                       &outs);
      g.move_list.push_back(m);
      g.succ_list.insert(g.succ_list.end(), outs.begin(), outs.end());
      g.succ_begin.push_back(static_cast<std::uint32_t>(g.succ_list.size()));
    }
  }
  g.move_begin[total] = static_cast<std::uint32_t>(g.move_list.size());
  return g;
}

GameGraph compose(const std::vector<TrafficTGA>& tgas, const NetworkTGA& net,
                  const EarlinessParams& params) {
  if (tgas.empty()) throw std::invalid_argument("need at least one loop");
  Rational tick = tgas.front().h;
  for (const auto& t : tgas) tick = rational_gcd(tick, t.h);
  return compose(tgas, net, params, tick);
}

std::vector<GameState> successors(const GameGraph& g, const GameState& s,
                                  const Move& move) {
  const std::size_t idx = g.encode(s);
  if (g.unsafe(idx)) throw std::invalid_argument("state is losing/absorbing");
  std::vector<int> forced;
  std::vector<Move> moves;
  enumerate_moves(g, s, &forced, &moves);
  if (std::find(moves.begin(), moves.end(), move) == moves.end())
    throw std::invalid_argument("move not enabled in this state");

  std::vector<int> fires = forced;
  if (move.kind == Move::Early) fires.push_back(move.loop);
  std::vector<std::uint32_t> outs;
  resolve_outcomes(g, s, fires, move.kind == Move::Early ? move.loop : -1,
                   &outs);
  std::vector<GameState> result;
  result.reserve(outs.size());
  for (auto o : outs) result.push_back(g.decode(o));
  return result;
}

GameStats game_stats(const GameGraph& g) {
  GameStats s;
  s.states = g.num_states;
  s.moves = g.move_list.size();
  s.outcomes = g.succ_list.size();
  for (std::size_t i = 0; i < g.num_states; ++i)
    if (g.unsafe(i)) ++s.unsafe_states;
  return s;
}

void print_game_stats(std::ostream& out, const GameStats& s) {
  out << "states " << s.states << "\nmoves " << s.moves << "\noutcomes "
      << s.outcomes << "\nunsafe " << s.unsafe_states << '\n';
}

}  // namespace petc

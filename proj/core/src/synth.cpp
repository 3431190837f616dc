#include "petc/synth.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace petc {

std::vector<std::size_t> initial_states(const GameGraph& g) {
  std::vector<std::size_t> out;
  GameState s;
  s.region.resize(g.loops.size());
  s.clock.assign(g.loops.size(), 0);
  s.net = 0;
  s.e = 0;
  // odometer over the per-loop region ranges
  for (std::size_t l = 0; l < g.loops.size(); ++l) s.region[l] = g.loops[l].k_min;
  for (;;) {
    out.push_back(g.encode(s));
    std::size_t l = 0;
    while (l < g.loops.size() && ++s.region[l] > g.loops[l].k_max) {
      s.region[l] = g.loops[l].k_min;
      ++l;
    }
    if (l == g.loops.size()) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Strategy solve_safety(const GameGraph& g) {
  const std::size_t ns = g.num_states;
  const std::size_t nm = g.move_list.size();

  // who owns each move, and how many unspoiled moves each state still has
  std::vector<std::uint32_t> owner(nm);
  std::vector<std::uint32_t> good(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    auto [b, e] = g.moves_of(s);
    good[s] = e - b;
    for (std::uint32_t m = b; m < e; ++m) owner[m] = static_cast<std::uint32_t>(s);
  }

  // reverse index: outcome state -> moves that can land there
  std::vector<std::uint32_t> rev_begin(ns + 1, 0);
  for (std::uint32_t t : g.succ_list) ++rev_begin[t + 1];
  for (std::size_t i = 0; i < ns; ++i) rev_begin[i + 1] += rev_begin[i];
  std::vector<std::uint32_t> rev_list(g.succ_list.size());
  {
    std::vector<std::uint32_t> fill(rev_begin.begin(), rev_begin.end() - 1);
    for (std::uint32_t m = 0; m < nm; ++m) {
      auto [b, e] = g.outcomes_of(m);
      for (std::uint32_t k = b; k < e; ++k) rev_list[fill[g.succ_list[k]]++] = m;
    }
  }

  std::vector<std::uint8_t> removed(ns, 0);
  std::vector<std::uint8_t> spoiled(nm, 0);
  std::deque<std::uint32_t> queue;
  for (std::size_t s = 0; s < ns; ++s)
    if (g.unsafe(s)) {
      removed[s] = 1;
      queue.push_back(static_cast<std::uint32_t>(s));
    }

  while (!queue.empty()) {
    const std::uint32_t t = queue.front();
    queue.pop_front();
    for (std::uint32_t k = rev_begin[t]; k < rev_begin[t + 1]; ++k) {
      const std::uint32_t m = rev_list[k];
      if (spoiled[m]) continue;
      spoiled[m] = 1;
      const std::uint32_t s = owner[m];
      if (!removed[s] && --good[s] == 0) {
        removed[s] = 1;
        queue.push_back(s);
      }
    }
  }

  Strategy st;
  st.winning.resize(ns);
  st.move_allowed.resize(nm);
  for (std::size_t s = 0; s < ns; ++s) {
    st.winning[s] = !removed[s];
    if (st.winning[s]) ++st.winning_count;
    auto [b, e] = g.moves_of(s);
    for (std::uint32_t m = b; m < e; ++m)
      st.move_allowed[m] = st.winning[s] && !spoiled[m];
  }
  for (std::size_t s0 : initial_states(g))
    if (!st.winning[s0]) st.losing_initial.push_back(s0);
  return st;
}

std::vector<Move> strategy_query(const Strategy& st, const GameGraph& g,
                                 const GameState& s) {
  const std::size_t idx = g.encode(s);
  if (!st.winning[idx])
    throw std::invalid_argument("strategy_query: state is not winning");
  std::vector<Move> out;
  auto [b, e] = g.moves_of(idx);
  for (std::uint32_t m = b; m < e; ++m)
    if (st.move_allowed[m]) out.push_back(g.move_list[m]);
  return out;
}

VerifyReport verify_strategy(const GameGraph& g, const Strategy& st) {
  VerifyReport rep;
  if (st.winning.size() != g.num_states ||
      st.move_allowed.size() != g.move_list.size())
    throw std::invalid_argument("verify_strategy: strategy does not fit game");

  // closure check over the whole winning set
  for (std::size_t s = 0; s < g.num_states; ++s) {
    if (!st.winning[s]) continue;
    ++rep.checked_states;
    if (g.unsafe(s)) ++rep.unsafe_winning;
    auto [b, e] = g.moves_of(s);
    std::size_t kept = 0;
    for (std::uint32_t m = b; m < e; ++m) {
      if (!st.move_allowed[m]) continue;
      ++kept;
      auto [ob, oe] = g.outcomes_of(m);
      for (std::uint32_t k = ob; k < oe; ++k)
        if (!st.winning[g.succ_list[k]]) {
          ++rep.escaping_moves;
          break;
        }
    }
    if (kept == 0) ++rep.empty_allowed;
  }

  // reachability from the winning initial states under allowed moves
  std::vector<std::uint8_t> seen(g.num_states, 0);
  std::deque<std::uint32_t> queue;
  for (std::size_t s0 : initial_states(g))
    if (st.winning[s0] && !seen[s0]) {
      seen[s0] = 1;
      queue.push_back(static_cast<std::uint32_t>(s0));
    }
  while (!queue.empty()) {
    const std::uint32_t s = queue.front();
    queue.pop_front();
    ++rep.reachable_from_initial;
    auto [b, e] = g.moves_of(s);
    for (std::uint32_t m = b; m < e; ++m) {
      if (!st.move_allowed[m]) continue;
      auto [ob, oe] = g.outcomes_of(m);
      for (std::uint32_t k = ob; k < oe; ++k) {
        const std::uint32_t t = g.succ_list[k];
        if (!seen[t] && st.winning[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
      }
    }
  }
  return rep;
}

namespace {

std::string format_net(int net, int bad) {
  if (net == 0) return "idle";
  if (net == bad) return "bad";
  return "inuse:" + std::to_string(net - 1);
}

int parse_net(const std::string& tok, int bad) {
  if (tok == "idle") return 0;
  if (tok == "bad") return bad;
  if (tok.rfind("inuse:", 0) == 0) return std::stoi(tok.substr(6)) + 1;
  throw std::invalid_argument("strategy file: bad channel state '" + tok + "'");
}

}  // namespace

void write_strategy(std::ostream& out, const GameGraph& g, const Strategy& st) {
  for (std::size_t s = 0; s < g.num_states; ++s) {
    if (!st.winning[s]) continue;
    const GameState d = g.decode(s);
    out << "regions";
    for (int q : d.region) out << ' ' << q;
    out << " clocks";
    for (int c : d.clock) out << ' ' << c;
    out << " net " << format_net(d.net, g.bad_net()) << " e " << d.e << " :";
    auto [b, e] = g.moves_of(s);
    for (std::uint32_t m = b; m < e; ++m) {
      if (!st.move_allowed[m]) continue;
      const Move& mv = g.move_list[m];
      if (mv.kind == Move::Wait)
        out << " wait";
      else
        out << " early:" << mv.loop;
    }
    out << '\n';
  }
}

Strategy read_strategy(std::istream& in, const GameGraph& g) {
  Strategy st;
  st.winning.assign(g.num_states, 0);
  st.move_allowed.assign(g.move_list.size(), 0);

  const std::size_t nl = g.loops.size();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    GameState s;
    s.region.resize(nl);
    s.clock.resize(nl);
    auto expect = [&](const char* what) {
      if (!(ss >> tok) || tok != what)
        throw std::invalid_argument("strategy file line " +
                                    std::to_string(lineno) + ": expected '" +
                                    what + "'");
    };
    expect("regions");
    for (std::size_t l = 0; l < nl; ++l) ss >> s.region[l];
    expect("clocks");
    for (std::size_t l = 0; l < nl; ++l) ss >> s.clock[l];
    expect("net");
    ss >> tok;
    s.net = parse_net(tok, g.bad_net());
    expect("e");
    ss >> s.e;
    expect(":");
    if (!ss)
      throw std::invalid_argument("strategy file line " +
                                  std::to_string(lineno) + ": truncated");

    const std::size_t idx = g.encode(s);
    st.winning[idx] = 1;
    auto [b, e] = g.moves_of(idx);
    while (ss >> tok) {
      Move mv;
      if (tok == "wait") {
        mv = Move{Move::Wait, -1};
      } else if (tok.rfind("early:", 0) == 0) {
        mv = Move{Move::Early, std::stoi(tok.substr(6))};
      } else {
        throw std::invalid_argument("strategy file line " +
                                    std::to_string(lineno) + ": bad move '" +
                                    tok + "'");
      }
      bool found = false;
      for (std::uint32_t m = b; m < e; ++m)
        if (g.move_list[m] == mv) {
          st.move_allowed[m] = 1;
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("strategy file line " +
                                    std::to_string(lineno) +
                                    ": move not enabled in this state");
    }
  }
  for (std::uint8_t w : st.winning) st.winning_count += w;
  for (std::size_t s0 : initial_states(g))
    if (!st.winning[s0]) st.losing_initial.push_back(s0);
  return st;
}

}  // namespace petc

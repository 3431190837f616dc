#include "petc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace petc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                              what);
}

double parse_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) fail(line, "trailing junk in number '" + tok + "'");
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "not a number: '" + tok + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range: '" + tok + "'");
  }
}

long parse_int(const std::string& tok, std::size_t line) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    fail(line, "not an integer: '" + tok + "'");
  return v;
}

bool parse_bool(const std::string& tok, std::size_t line) {
  if (tok == "true") return true;
  if (tok == "false") return false;
  fail(line, "expected true/false, got '" + tok + "'");
}

// "[a b; c d]", "eye(n)" or "s*eye(n)"
Mat parse_matrix(const std::string& val, std::size_t line) {
  const auto eye = val.find("eye(");
  if (eye != std::string::npos) {
    if (val.back() != ')') fail(line, "unterminated eye()");
    const std::string dim = val.substr(eye + 4, val.size() - eye - 5);
    const long n = parse_int(trim(dim), line);
    if (n < 1) fail(line, "eye() needs a positive size");
    double scale = 1.0;
    if (eye > 0) {
      const std::string head = trim(val.substr(0, eye));
      if (head.empty() || head.back() != '*')
        fail(line, "expected scalar*eye(n)");
      scale = parse_double(trim(head.substr(0, head.size() - 1)), line);
    }
    return scale * Mat::Identity(n, n);
  }

  if (val.size() < 2 || val.front() != '[' || val.back() != ']')
    fail(line, "matrix must be bracketed");
  const std::string body = val.substr(1, val.size() - 2);
  std::vector<std::vector<double>> rows;
  std::stringstream rs(body);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> vals;
    std::istringstream es(row);
    std::string tok;
    while (es >> tok) vals.push_back(parse_double(tok, line));
    if (vals.empty()) fail(line, "empty matrix row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(line, "empty matrix");
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) fail(line, "ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

Vec parse_vector(const std::string& val, std::size_t line) {
  Mat m = parse_matrix(val, line);
  if (m.rows() == 1) return m.transpose().col(0);
  if (m.cols() == 1) return m.col(0);
  fail(line, "expected a vector");
}

Rational parse_rat(const std::string& tok, std::size_t line) {
  try {
    return parse_rational(tok);
  } catch (const std::exception& ex) {
    fail(line, ex.what());
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_matrix(const Mat& m) {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
  }
  os << ']';
  return os.str();
}

}  // namespace

std::string arbiter_name(ArbiterPolicy p) {
  switch (p) {
    case ArbiterPolicy::RoundRobin: return "round_robin";
    case ArbiterPolicy::LowestLoopId: return "lowest_loop_id";
    case ArbiterPolicy::SeededRandom: return "seeded_random";
  }
  throw std::logic_error("unreachable");
}

ArbiterPolicy arbiter_from_name(const std::string& name) {
  if (name == "round_robin") return ArbiterPolicy::RoundRobin;
  if (name == "lowest_loop_id") return ArbiterPolicy::LowestLoopId;
  if (name == "seeded_random") return ArbiterPolicy::SeededRandom;
  throw std::invalid_argument("unknown arbiter '" + name + "'");
}

ProjectConfig parse_config(std::istream& in) {
  ProjectConfig c;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section == "loop") c.loops.emplace_back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) fail(lineno, "empty value for '" + key + "'");

    if (section == "loop") {
      if (c.loops.empty()) fail(lineno, "loop key outside [loop]");
      auto& lc = c.loops.back();
      if (key == "a") lc.A = parse_matrix(val, lineno);
      else if (key == "b") lc.B = parse_matrix(val, lineno);
      else if (key == "k") lc.K = parse_matrix(val, lineno);
      else if (key == "lqr_q") lc.lqr_q = parse_matrix(val, lineno);
      else if (key == "lqr_r") lc.lqr_r = parse_matrix(val, lineno);
      else if (key == "q_trig") lc.q_trig = parse_matrix(val, lineno);
      else if (key == "trigger_rho") lc.trigger_rho = parse_double(val, lineno);
      else if (key == "h") lc.h = parse_rat(val, lineno);
      else if (key == "k_bar") lc.k_bar = static_cast<int>(parse_int(val, lineno));
      else if (key == "x0") lc.x0 = parse_vector(val, lineno);
      else fail(lineno, "unknown loop key '" + key + "'");
    } else if (section == "network") {
      if (key == "delta") c.delta = static_cast<int>(parse_int(val, lineno));
      else if (key == "base_tick") c.base_tick = parse_rat(val, lineno);
      else fail(lineno, "unknown network key '" + key + "'");
    } else if (section == "earliness") {
      if (key == "r") c.earliness.r = static_cast<int>(parse_int(val, lineno));
      else if (key == "e_ref") c.earliness.e_ref = static_cast<int>(parse_int(val, lineno));
      else if (key == "e_max") c.earliness.E = static_cast<int>(parse_int(val, lineno));
      else fail(lineno, "unknown earliness key '" + key + "'");
    } else if (section == "abstraction") {
      if (key == "eig_threshold") c.eig_threshold = parse_double(val, lineno);
      else if (key == "sdp_tol") c.sdp.tol = parse_double(val, lineno);
      else if (key == "sdp_max_iter") c.sdp.max_iter = static_cast<int>(parse_int(val, lineno));
      else if (key == "inclusion_band") c.sdp.inclusion_band = parse_double(val, lineno);
      else if (key == "allow_sub_miet_early") c.sdp.allow_sub_miet_early = parse_bool(val, lineno);
      else if (key == "threads") c.sdp.threads = static_cast<int>(parse_int(val, lineno));
      else fail(lineno, "unknown abstraction key '" + key + "'");
    } else if (section == "simulation") {
      if (key == "duration") c.duration = parse_rat(val, lineno);
      else if (key == "arbiter") {
        try {
          c.arbiter = arbiter_from_name(val);
        } catch (const std::exception& ex) {
          fail(lineno, ex.what());
        }
      } else if (key == "seed") c.seed = static_cast<unsigned>(parse_int(val, lineno));
      else if (key == "prefer_wait") c.prefer_wait = parse_bool(val, lineno);
      else fail(lineno, "unknown simulation key '" + key + "'");
    } else if (section == "output") {
      if (key == "dir") c.out_dir = val;
      else fail(lineno, "unknown output key '" + key + "'");
    } else if (section.empty()) {
      fail(lineno, "key before any section header");
    } else {
      fail(lineno, "unknown section '" + section + "'");
    }
  }

  c.validate();
  return c;
}

ProjectConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  return parse_config(in);
}

void ProjectConfig::validate() const {
  if (loops.empty()) throw std::invalid_argument("config has no [loop]");
  for (std::size_t l = 0; l < loops.size(); ++l) {
    const auto& lc = loops[l];
    const std::string at = "loop " + std::to_string(l + 1) + ": ";
    const auto n = lc.A.rows();
    if (n == 0 || lc.A.cols() != n)
      throw std::invalid_argument(at + "A must be square and present");
    if (lc.B.rows() != n || lc.B.cols() < 1)
      throw std::invalid_argument(at + "B must have a row per state");
    const bool has_lqr = lc.lqr_q.has_value() || lc.lqr_r.has_value();
    if (lc.K.has_value() == has_lqr)
      throw std::invalid_argument(
          at + "give exactly one of k or the lqr_q/lqr_r pair");
    if (has_lqr && (!lc.lqr_q || !lc.lqr_r))
      throw std::invalid_argument(at + "lqr_q and lqr_r come together");
    if (lc.q_trig.has_value() == lc.trigger_rho.has_value())
      throw std::invalid_argument(
          at + "give exactly one of q_trig or trigger_rho");
    if (lc.K && (lc.K->rows() != lc.B.cols() || lc.K->cols() != n))
      throw std::invalid_argument(at + "k must be m-by-n");
    if (lc.lqr_q && (lc.lqr_q->rows() != n || lc.lqr_q->cols() != n))
      throw std::invalid_argument(at + "lqr_q must be n-by-n");
    if (lc.lqr_r &&
        (lc.lqr_r->rows() != lc.B.cols() || lc.lqr_r->cols() != lc.B.cols()))
      throw std::invalid_argument(at + "lqr_r must be m-by-m");
    if (lc.q_trig && (lc.q_trig->rows() != 2 * n || lc.q_trig->cols() != 2 * n))
      throw std::invalid_argument(at + "q_trig must be 2n-by-2n");
    if (!lc.h.positive()) throw std::invalid_argument(at + "h must be positive");
    if (lc.k_bar < 1) throw std::invalid_argument(at + "k_bar must be >= 1");
    if (lc.x0 && lc.x0->size() != n)
      throw std::invalid_argument(at + "x0 must have n entries");
  }
  if (delta < 1) throw std::invalid_argument("delta must be >= 1");
  if (base_tick && !base_tick->positive())
    throw std::invalid_argument("base_tick must be positive");
  earliness.validate();
  if (eig_threshold <= 0.0)
    throw std::invalid_argument("eig_threshold must be positive");
  if (duration.num < 0) throw std::invalid_argument("duration must be >= 0");
}

void write_config(std::ostream& out, const ProjectConfig& c) {
  for (const auto& lc : c.loops) {
    out << "[loop]\n";
    out << "a = " << format_matrix(lc.A) << '\n';
    out << "b = " << format_matrix(lc.B) << '\n';
    if (lc.K) out << "k = " << format_matrix(*lc.K) << '\n';
    if (lc.lqr_q) out << "lqr_q = " << format_matrix(*lc.lqr_q) << '\n';
    if (lc.lqr_r) out << "lqr_r = " << format_matrix(*lc.lqr_r) << '\n';
    if (lc.q_trig) out << "q_trig = " << format_matrix(*lc.q_trig) << '\n';
    if (lc.trigger_rho)
      out << "trigger_rho = " << format_double(*lc.trigger_rho) << '\n';
    out << "h = " << format_rational(lc.h) << '\n';
    out << "k_bar = " << lc.k_bar << '\n';
    if (lc.x0) out << "x0 = " << format_matrix(lc.x0->transpose()) << '\n';
    out << '\n';
  }
  out << "[network]\n";
  out << "delta = " << c.delta << '\n';
  if (c.base_tick) out << "base_tick = " << format_rational(*c.base_tick) << '\n';
  out << '\n';
  out << "[earliness]\n";
  out << "r = " << c.earliness.r << '\n';
  out << "e_ref = " << c.earliness.e_ref << '\n';
  out << "e_max = " << c.earliness.E << '\n';
  out << '\n';
  out << "[abstraction]\n";
  out << "eig_threshold = " << format_double(c.eig_threshold) << '\n';
  out << "sdp_tol = " << format_double(c.sdp.tol) << '\n';
  out << "sdp_max_iter = " << c.sdp.max_iter << '\n';
  out << "inclusion_band = " << format_double(c.sdp.inclusion_band) << '\n';
  out << "allow_sub_miet_early = "
      << (c.sdp.allow_sub_miet_early ? "true" : "false") << '\n';
  out << "threads = " << c.sdp.threads << '\n';
  out << '\n';
  out << "[simulation]\n";
  out << "duration = " << format_rational(c.duration) << '\n';
  out << "arbiter = " << arbiter_name(c.arbiter) << '\n';
  out << "seed = " << c.seed << '\n';
  out << "prefer_wait = " << (c.prefer_wait ? "true" : "false") << '\n';
  out << '\n';
  out << "[output]\n";
  out << "dir = " << c.out_dir << '\n';
}

PlantLoop make_plant(const LoopConfig& lc) {
  PlantLoop loop;
  loop.A = lc.A;
  loop.B = lc.B;
  loop.h = lc.h;
  loop.k_bar = lc.k_bar;

  Mat P;       // Lyapunov certificate for the rho design
  Mat Q_lyap;  // decay comparison weight
  if (lc.K) {
    loop.K = *lc.K;
    if (lc.trigger_rho) {
      // no LQR data: certify the given gain against the identity weight
      Q_lyap = Mat::Identity(lc.A.rows(), lc.A.cols());
      P = solve_lyapunov(lc.A + lc.B * loop.K, Q_lyap);
    }
  } else {
    const LqrResult lqr = lqr_gain(lc.A, lc.B, *lc.lqr_q, *lc.lqr_r);
    loop.K = -lqr.K;
    if (lc.trigger_rho) {
      P = lqr.P_care;
      Q_lyap = *lc.lqr_q + lqr.K.transpose() * (*lc.lqr_r) * lqr.K;
    }
  }
  if (lc.q_trig) {
    loop.Q_trig = *lc.q_trig;
  } else {
    loop.Q_trig = lyapunov_triggering_matrix(lc.A, lc.B, loop.K, P, Q_lyap,
                                             *lc.trigger_rho);
  }
  loop.validate();
  return loop;
}

}  // namespace petc

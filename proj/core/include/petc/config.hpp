#pragma once

#include <istream>
#include <optional>
#include <string>

#include "petc/sim.hpp"

namespace petc {

// one [loop] section: the plant, either a gain or LQR weights (exactly one),
// and either a full triggering matrix or a Lyapunov decay rate (exactly one)
struct LoopConfig {
  Mat A;
  Mat B;
  std::optional<Mat> K;
  std::optional<Mat> lqr_q;
  std::optional<Mat> lqr_r;
  std::optional<Mat> q_trig;
  std::optional<double> trigger_rho;
  Rational h{1, 100};
  int k_bar = 1;
  std::optional<Vec> x0;  // only needed to simulate
};

struct ProjectConfig {
  std::vector<LoopConfig> loops;
  int delta = 1;
  std::optional<Rational> base_tick;  // default: gcd of the loop periods
  EarlinessParams earliness{1, 1, 1};
  double eig_threshold = 1e-3;
  SdpOptions sdp;
  Rational duration{1, 1};
  ArbiterPolicy arbiter = ArbiterPolicy::RoundRobin;
  unsigned seed = 0;
  bool prefer_wait = true;
  std::string out_dir = "out";

  void validate() const;
};

// line-oriented text: [section] headers, key = value pairs, '#' comments.
// Matrices are bracketed row-major with ';' between rows; eye(n) and
// scalar*eye(n) are accepted. Rationals are exact ("1/100" or decimals).
ProjectConfig parse_config(std::istream& in);
ProjectConfig parse_config_file(const std::string& path);

// canonical serialization; parse(write(c)) == c field for field
void write_config(std::ostream& out, const ProjectConfig& c);

// resolves the gain and triggering matrix (LQR and/or Lyapunov design paths)
PlantLoop make_plant(const LoopConfig& lc);

std::string arbiter_name(ArbiterPolicy p);
ArbiterPolicy arbiter_from_name(const std::string& name);

}  // namespace petc

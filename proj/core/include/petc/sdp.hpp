#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "petc/regions.hpp"

namespace petc {

enum class Sense { Ge, Le, Eq };

struct TraceConstraint {
  Mat G;
  Sense sense = Sense::Ge;
  double rhs = 0.0;
};

// trace-linear feasibility problem over the PSD cone:
//   find X >= 0 with Tr(X G_l) (sense_l) rhs_l, including exactly one
//   trace-equality that rules out X = 0.
struct TraceLP {
  int n = 0;
  std::vector<TraceConstraint> constraints;

  void validate() const;
};

enum class FeasStatus { Feasible, Infeasible, Unknown };

struct FeasibilityVerdict {
  FeasStatus status = FeasStatus::Unknown;
  std::optional<Mat> X;     // near-feasible point when Feasible
  std::optional<Vec> dual;  // verified Farkas multipliers when Infeasible
  double residual = 0.0;
  int iterations = 0;
};

struct SdpOptions {
  double tol = 1e-6;
  int max_iter = 20000;
  // inequalities are slackened by this much (in normalized-constraint units)
  // before deciding an edge, so only robustly empty transitions are dropped
  double inclusion_band = 8.3e-5;
  bool allow_sub_miet_early = false;
  int threads = 0;  // 0 = hardware concurrency
};

// symmetric <-> vector isometry (off-diagonals scaled by sqrt(2), so that
// dot(svec(A), svec(B)) = Tr(A B))
Vec svec(const Mat& S);
Mat unsvec(const Vec& v, int n);

// constraint system asking "is there a state of region i whose firing at time
// k lands in region j": membership tests for i at the source, for j after
// propagation by M(k), each normalized to unit spectral radius and slackened
// by `margin`. The >= row is omitted when the region is the terminal one
// (that region is a complement set, not a sublevel test).
TraceLP assemble_early_sdp(int i, int k, int j, const TimingTables& tables,
                           const RegionSpec& spec, double margin = 0.0);

// trigger case: fire exactly at the region's own time, k = i
TraceLP assemble_transition_sdp(int i, int j, const TimingTables& tables,
                                const RegionSpec& spec, double margin = 0.0);

// alternating-projection (Douglas-Rachford) conic feasibility with a verified
// separating-hyperplane certificate for the infeasible answer; never throws
// past validation — undecided instances come back Unknown.
FeasibilityVerdict sdp_feasibility(const TraceLP& p, double tol = 1e-6,
                                   int max_iter = 20000);

struct Edge {
  int source = 0;
  int k = 0;  // firing time; equals source on trigger edges
  int target = 0;
  FeasStatus status = FeasStatus::Unknown;
  double residual = 0.0;
};

// all (i, i, j) edges whose slackened relaxation is not certified empty.
// Unknown counts as present: dropping a real transition would break the
// simulation relation, keeping a spurious one only loses tightness.
std::vector<Edge> transition_relation(const TimingTables& tables,
                                      const RegionSpec& spec,
                                      const SdpOptions& opts = {});

// early edges (i, k, j) for k strictly below i; k starts at 1 when
// allow_sub_miet_early is set, at k_min otherwise
std::vector<Edge> early_transition_relation(const TimingTables& tables,
                                            const RegionSpec& spec,
                                            const SdpOptions& opts = {});

// draws `samples` unit vectors, keeps those lying in region i, fires them at
// time k and reports the successor regions seen. Deterministic given seed.
std::set<int> sampling_oracle(const TimingTables& tables,
                              const RegionSpec& spec, int i, int k,
                              int samples, unsigned seed);

void export_relation_csv(std::ostream& out, int loop_id,
                         const std::vector<Edge>& trigger,
                         const std::vector<Edge>& early);

}  // namespace petc

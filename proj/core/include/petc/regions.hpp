#pragma once

#include "petc/lti.hpp"

namespace petc {

// effective inter-event bounds: communication can only happen in
// [k_min, k_max] once the trigger test is restricted to the states that can
// actually reach it, so only those k index quotient regions.
struct RegionSpec {
  int k_min = 1;
  int k_max = 1;
  double eig_threshold = 1e-3;

  int region_count() const { return k_max - k_min + 1; }
};

// k_min: first k whose test matrix has an eigenvalue meaningfully above zero
// (lambda_max(N(k)) > threshold), i.e. some state triggers there.
// k_max: first k >= k_min where N(k) is positive semidefinite up to a
// threshold-sized relative dip (lambda_min >= -threshold * lambda_max), i.e.
// essentially every state has triggered; k_bar if that never happens.
// all N(k) essentially negative: degenerate single region at k_bar (warns).
RegionSpec effective_bounds(const TimingTables& tables, double eig_threshold);

// smallest k in [k_min, k_max] with x^T N(k) x > 0, else k_max.
// strict inequality; x = 0 lands on k_max.
int region_of_state(const Vec& x, const TimingTables& tables,
                    const RegionSpec& spec);

}  // namespace petc

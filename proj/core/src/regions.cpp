#include "petc/regions.hpp"

#include <Eigen/Eigenvalues>
#include <iostream>

namespace petc {

RegionSpec effective_bounds(const TimingTables& tables, double eig_threshold) {
  if (!(eig_threshold > 0.0))
    throw std::invalid_argument("eig_threshold must be positive");
  const int k_bar = tables.k_bar();
  if (k_bar < 1) throw std::invalid_argument("empty timing tables");

  std::vector<double> lo(k_bar), hi(k_bar);
  for (int k = 1; k <= k_bar; ++k) {
    Eigen::SelfAdjointEigenSolver<Mat> es(tables.N[k - 1],
                                          Eigen::EigenvaluesOnly);
    lo[k - 1] = es.eigenvalues().minCoeff();
    hi[k - 1] = es.eigenvalues().maxCoeff();
  }

  RegionSpec spec;
  spec.eig_threshold = eig_threshold;

  int k_min = 0;
  for (int k = 1; k <= k_bar; ++k)
    if (hi[k - 1] > eig_threshold) {
      k_min = k;
      break;
    }
  if (k_min == 0) {
    std::cerr << "warning: trigger test never fires below the horizon; "
                 "collapsing to a single region at k=" << k_bar << "\n";
    spec.k_min = spec.k_max = k_bar;
    return spec;
  }

  int k_max = k_bar;
  for (int k = k_min; k <= k_bar; ++k)
    if (lo[k - 1] >= -eig_threshold * hi[k - 1]) {
      k_max = k;
      break;
    }

  spec.k_min = k_min;
  spec.k_max = k_max;
  return spec;
}

int region_of_state(const Vec& x, const TimingTables& tables,
                    const RegionSpec& spec) {
  if (!x.allFinite()) throw std::invalid_argument("state must be finite");
  if (x.size() != tables.N.front().rows())
    throw std::invalid_argument("state dimension mismatch");
  for (int k = spec.k_min; k < spec.k_max; ++k)
    if (x.dot(tables.N[k - 1] * x) > 0.0) return k;
  return spec.k_max;
}

}  // namespace petc

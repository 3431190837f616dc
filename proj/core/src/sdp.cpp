#include "petc/sdp.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace petc {

void TraceLP::validate() const {
  if (n < 1) throw std::invalid_argument("TraceLP: dimension must be >= 1");
  int equalities = 0;
  for (const auto& c : constraints) {
    if (c.G.rows() != n || c.G.cols() != n)
      throw std::invalid_argument("TraceLP: constraint dimension mismatch");
    if (!c.G.allFinite() || !std::isfinite(c.rhs))
      throw std::invalid_argument("TraceLP: non-finite constraint");
    if ((c.G - c.G.transpose()).norm() > 1e-9 * std::max(1.0, c.G.norm()))
      throw std::invalid_argument("TraceLP: constraint matrix not symmetric");
    if (c.sense == Sense::Eq) ++equalities;
  }
  if (equalities != 1)
    throw std::invalid_argument("TraceLP: need exactly one trace equality");
}

Vec svec(const Mat& S) {
  const int n = static_cast<int>(S.rows());
  static const double rt2 = std::sqrt(2.0);
  Vec v(n * (n + 1) / 2);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    v(idx++) = S(j, j);
    for (int i = j + 1; i < n; ++i) v(idx++) = rt2 * S(i, j);
  }
  return v;
}

Mat unsvec(const Vec& v, int n) {
  static const double irt2 = 1.0 / std::sqrt(2.0);
  Mat S(n, n);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    S(j, j) = v(idx++);
    for (int i = j + 1; i < n; ++i) {
      S(i, j) = S(j, i) = irt2 * v(idx++);
    }
  }
  return S;
}

namespace {

double spectral_absmax(const Mat& G) {
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat unit_scaled(const Mat& G) {
  const double s = spectral_absmax(G);
  return s > 0.0 ? Mat(G / s) : G;
}

void check_region_index(int v, const RegionSpec& spec, const char* what) {
  if (v < spec.k_min || v > spec.k_max)
    throw std::invalid_argument(std::string(what) + " out of region range");
}

}  // namespace

TraceLP assemble_early_sdp(int i, int k, int j, const TimingTables& tables,
                           const RegionSpec& spec, double margin) {
  check_region_index(i, spec, "source region");
  check_region_index(j, spec, "target region");
  if (k < 1 || k > i) throw std::invalid_argument("firing time out of range");
  if (spec.k_max > tables.k_bar())
    throw std::invalid_argument("region spec exceeds tables");

  const int n = static_cast<int>(tables.N.front().rows());
  TraceLP p;
  p.n = n;

  if (i != spec.k_max)
    p.constraints.push_back({unit_scaled(tables.N[i - 1]), Sense::Ge, -margin});
  for (int ip = spec.k_min; ip < i; ++ip)
    p.constraints.push_back({unit_scaled(tables.N[ip - 1]), Sense::Le, margin});

  const Mat& Mk = tables.M[k - 1];
  if (j != spec.k_max) {
    Mat G = Mk.transpose() * tables.N[j - 1] * Mk;
    p.constraints.push_back(
        {unit_scaled(((G + G.transpose()) / 2.0).eval()), Sense::Ge, -margin});
  }
  for (int jp = spec.k_min; jp < j; ++jp) {
    Mat G = Mk.transpose() * tables.N[jp - 1] * Mk;
    p.constraints.push_back(
        {unit_scaled(((G + G.transpose()) / 2.0).eval()), Sense::Le, margin});
  }

  p.constraints.push_back({Mat::Identity(n, n), Sense::Eq, 1.0});
  return p;
}

TraceLP assemble_transition_sdp(int i, int j, const TimingTables& tables,
                                const RegionSpec& spec, double margin) {
  return assemble_early_sdp(i, i, j, tables, spec, margin);
}

namespace {

struct FoldedSystem {
  // inequalities folded to Tr(X Ghat_l) >= c_l
  std::vector<Mat> Ghat;
  Vec c;
  Mat Geq;
  double ceq = 1.0;
};

FoldedSystem fold(const TraceLP& p) {
  FoldedSystem f;
  std::vector<double> cs;
  for (const auto& con : p.constraints) {
    switch (con.sense) {
      case Sense::Ge:
        f.Ghat.push_back(con.G);
        cs.push_back(con.rhs);
        break;
      case Sense::Le:
        f.Ghat.push_back(-con.G);
        cs.push_back(-con.rhs);
        break;
      case Sense::Eq:
        f.Geq = con.G;
        f.ceq = con.rhs;
        break;
    }
  }
  f.c = Eigen::Map<Vec>(cs.data(), static_cast<Eigen::Index>(cs.size()));
  return f;
}

// verify a Farkas candidate (mu, lambda): lambda >= 0 (clamped), positive gap
// mu*ceq + lambda.c (normalized to 1), and S = -mu*Geq - sum lambda_l Ghat_l
// PSD up to eigensolver roundoff. A pass is an airtight emptiness proof for
// {X >= 0, Tr(X Geq) = ceq, Tr(X Ghat_l) >= c_l}: any feasible X would give
// 0 <= <X,S> = -mu*ceq - sum lambda_l <X,Ghat_l> <= -gap < 0.
// When Geq = I an inexact candidate is repairable: lowering mu by the PSD
// deficit delta adds delta*I to S, and the proof survives as long as the
// shrunken gap 1 - delta*ceq stays positive.
bool verify_certificate(const FoldedSystem& f, double mu, Vec lambda,
                        Vec* out) {
  const int p = static_cast<int>(lambda.size());
  const int n = static_cast<int>(f.Geq.rows());
  lambda = lambda.cwiseMax(0.0);
  double gap = mu * f.ceq + lambda.dot(f.c);
  if (!(gap > 0.0) || !std::isfinite(gap)) return false;
  mu /= gap;
  lambda /= gap;

  auto dual_slack_min = [&](double m) {
    Mat S = -m * f.Geq;
    for (int l = 0; l < p; ++l) S -= lambda(l) * f.Ghat[l];
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    return std::make_pair(es.eigenvalues().minCoeff(), S.norm());
  };

  auto [lmin, snorm] = dual_slack_min(mu);
  const bool identity_eq = (f.Geq - Mat::Identity(n, n)).norm() == 0.0;
  if (lmin < 0.0 && identity_eq && f.ceq > 0.0) {
    const double delta = -lmin * (1.0 + 1e-9) + 1e-300;
    if (delta * f.ceq >= 1.0) return false;  // repair would erase the gap
    mu -= delta;
    gap = 1.0 - delta * f.ceq;
    mu /= gap;
    lambda /= gap;
    std::tie(lmin, snorm) = dual_slack_min(mu);
  }
  if (lmin < -n * 1e-12 * std::max(1.0, snorm)) return false;
  out->resize(p + 1);
  (*out)(0) = mu;
  out->tail(p) = lambda;
  return true;
}

}  // namespace

FeasibilityVerdict sdp_feasibility(const TraceLP& p, double tol,
                                   int max_iter) {
  p.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");

  const int n = p.n;
  const FoldedSystem f = fold(p);
  const int m = static_cast<int>(f.Ghat.size());

  FeasibilityVerdict v;

  // cheap witness: the centered matrix satisfying the trace equality
  {
    const double treq = f.Geq.trace();
    if (std::abs(treq) > 1e-12 && f.ceq / treq >= 0.0) {
      Mat X0 = (f.ceq / treq) * Mat::Identity(n, n);
      bool ok = true;
      for (int l = 0; l < m && ok; ++l)
        ok = (X0.cwiseProduct(f.Ghat[l]).sum() >= f.c(l));
      if (ok) {
        v.status = FeasStatus::Feasible;
        v.X = X0;
        v.residual = 0.0;
        return v;
      }
    }
  }

  // one inequality against the trace slice: extreme points are rank-one, so
  // the answer is an eigenvalue comparison either way
  if (m == 1 && (f.Geq - Mat::Identity(n, n)).norm() == 0.0 && f.ceq > 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(f.Ghat[0]);
    const double lmax = es.eigenvalues().maxCoeff();
    if (f.ceq * lmax >= f.c(0)) {
      int which = 0;
      es.eigenvalues().maxCoeff(&which);
      Vec q = es.eigenvectors().col(which);
      v.status = FeasStatus::Feasible;
      v.X = f.ceq * q * q.transpose();
      v.residual = 0.0;
      return v;
    }
    const double lam = 1.0 / (f.c(0) - f.ceq * lmax);
    Vec cert;
    if (verify_certificate(f, -lam * lmax, Vec::Constant(1, lam), &cert)) {
      v.status = FeasStatus::Infeasible;
      v.dual = cert;
      v.residual = 0.0;
      return v;
    }
  }

  const int d = n * (n + 1) / 2;

  // stacked affine system over (svec(X), slacks)
  Mat At(1 + m, d + m);  // rows of the affine map
  At.setZero();
  At.row(0).head(d) = svec(f.Geq).transpose();
  for (int l = 0; l < m; ++l) {
    At.row(1 + l).head(d) = svec(f.Ghat[l]).transpose();
    At(1 + l, d + l) = -1.0;
  }
  Vec bt(1 + m);
  bt(0) = f.ceq;
  bt.tail(m) = f.c;

  Eigen::LDLT<Mat> gram((At * At.transpose()).eval());
  if (gram.info() != Eigen::Success)
    throw numeric_error("degenerate constraint system");

  auto proj_affine = [&](const Vec& w) -> Vec {
    return w + At.transpose() * gram.solve(bt - At * w);
  };

  // start from the trace-slice center with matching slacks
  Vec w(d + m);
  {
    const double treq = f.Geq.trace();
    Mat X0 = std::abs(treq) > 1e-12 ? Mat((f.ceq / treq) * Mat::Identity(n, n))
                                    : Mat::Zero(n, n);
    w.head(d) = svec(X0);
    for (int l = 0; l < m; ++l)
      w(d + l) = X0.cwiseProduct(f.Ghat[l]).sum() - f.c(l);
  }

  Vec zc(d + m);
  for (int it = 1; it <= max_iter; ++it) {
    const Vec zh = proj_affine(w);

    Mat X = unsvec(zh.head(d), n);
    Eigen::SelfAdjointEigenSolver<Mat> es(X);
    const double xmin = es.eigenvalues().minCoeff();
    const double smin = m > 0 ? zh.tail(m).minCoeff() : 0.0;
    const double dist = std::max(0.0, std::max(-xmin, -smin));
    if (dist <= tol) {
      v.status = FeasStatus::Feasible;
      v.X = std::move(X);
      v.residual = dist;
      v.iterations = it;
      return v;
    }

    const Vec y = 2.0 * zh - w;
    Mat Y = unsvec(y.head(d), n);
    Eigen::SelfAdjointEigenSolver<Mat> ep(Y);
    Mat Yp = ep.eigenvectors() *
             ep.eigenvalues().cwiseMax(0.0).asDiagonal() *
             ep.eigenvectors().transpose();
    zc.head(d) = svec(Yp);
    if (m > 0) zc.tail(m) = y.tail(m).cwiseMax(0.0);

    w += zc - zh;

    if (it % 100 == 0 || it == max_iter) {
      // in the empty case the displacement between the two projections
      // settles on the gap vector, whose affine multipliers separate the sets
      const Vec gapvec = zh - zc;
      Vec nu = gram.solve(At * gapvec);
      Vec cert;
      if (verify_certificate(f, nu(0), nu.tail(m), &cert)) {
        v.status = FeasStatus::Infeasible;
        v.dual = std::move(cert);
        v.residual = 0.0;
        v.iterations = it;
        return v;
      }
    }
  }

  {
    const Vec zh = proj_affine(w);
    Mat X = unsvec(zh.head(d), n);
    Eigen::SelfAdjointEigenSolver<Mat> es(X, Eigen::EigenvaluesOnly);
    const double xmin = es.eigenvalues().minCoeff();
    const double smin = m > 0 ? zh.tail(m).minCoeff() : 0.0;
    v.residual = std::max(0.0, std::max(-xmin, -smin));
  }
  v.status = FeasStatus::Unknown;
  v.iterations = max_iter;
  return v;
}

namespace {

// evaluates `jobs` solver tasks across threads; results land by index so the
// output never depends on scheduling
std::vector<Edge> run_jobs(
    const std::vector<std::tuple<int, int, int>>& jobs,
    const TimingTables& tables, const RegionSpec& spec,
    const SdpOptions& opts) {
  std::vector<std::optional<Edge>> slots(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const auto [i, k, j] = jobs[idx];
      TraceLP p = assemble_early_sdp(i, k, j, tables, spec,
                                     opts.inclusion_band);
      FeasibilityVerdict verdict = sdp_feasibility(p, opts.tol, opts.max_iter);
      if (verdict.status != FeasStatus::Infeasible)
        slots[idx] = Edge{i, k, j, verdict.status, verdict.residual};
    }
  };

  unsigned nthreads = opts.threads > 0
                          ? static_cast<unsigned>(opts.threads)
                          : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads,
                                std::max<std::size_t>(jobs.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<Edge> edges;
  for (const auto& slot : slots)
    if (slot) edges.push_back(*slot);
  return edges;
}

}  // namespace

std::vector<Edge> transition_relation(const TimingTables& tables,
                                      const RegionSpec& spec,
                                      const SdpOptions& opts) {
  std::vector<std::tuple<int, int, int>> jobs;
  for (int i = spec.k_min; i <= spec.k_max; ++i)
    for (int j = spec.k_min; j <= spec.k_max; ++j)
      jobs.emplace_back(i, i, j);
  return run_jobs(jobs, tables, spec, opts);
}

std::vector<Edge> early_transition_relation(const TimingTables& tables,
                                            const RegionSpec& spec,
                                            const SdpOptions& opts) {
  std::vector<std::tuple<int, int, int>> jobs;
  const int k_floor = opts.allow_sub_miet_early ? 1 : spec.k_min;
  for (int i = spec.k_min; i <= spec.k_max; ++i)
    for (int k = k_floor; k < i; ++k)
      for (int j = spec.k_min; j <= spec.k_max; ++j)
        jobs.emplace_back(i, k, j);
  return run_jobs(jobs, tables, spec, opts);
}

std::set<int> sampling_oracle(const TimingTables& tables,
                              const RegionSpec& spec, int i, int k,
                              int samples, unsigned seed) {
  check_region_index(i, spec, "source region");
  if (k < 1 || k > i) throw std::invalid_argument("firing time out of range");
  if (samples < 1) throw std::invalid_argument("need at least one sample");

  const int n = static_cast<int>(tables.N.front().rows());
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;

  std::set<int> seen;
  for (int s = 0; s < samples; ++s) {
    Vec x(n);
    do {
      for (int q = 0; q < n; ++q) x(q) = gauss(rng);
    } while (x.norm() < 1e-12);
    x.normalize();
    if (region_of_state(x, tables, spec) != i) continue;
    seen.insert(region_of_state(tables.M[k - 1] * x, tables, spec));
  }
  return seen;
}

void export_relation_csv(std::ostream& out, int loop_id,
                         const std::vector<Edge>& trigger,
                         const std::vector<Edge>& early) {
  out << "loop_id,source_region,action_time_k,target_region,verdict,residual\n";
  auto emit = [&](const Edge& e) {
    out << loop_id << ',' << e.source << ',' << e.k << ',' << e.target << ','
        << (e.status == FeasStatus::Feasible ? "feasible" : "unknown") << ','
        << e.residual << '\n';
  };
  for (const auto& e : trigger) emit(e);
  for (const auto& e : early) emit(e);
}

}  // namespace petc

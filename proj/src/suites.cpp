#include "imlab/suites.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "imlab/errors.h"
#include "imlab/sampling.h"

namespace imlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double alpha_norm(const Vec& w, const Vec& v) { return w.cwiseProduct(v).norm(); }

double p_op_norm(const Vec& w, const Mat& a) {
  return op_norm(w.asDiagonal() * a * w.cwiseInverse().asDiagonal());
}

// Records one measured / bound comparison with the relative envelope budget.
void record(SuiteResult& r, double measured, double bound) {
  ++r.checks;
  double ratio = 0.0;
  if (bound > 0.0) {
    ratio = measured / bound;
  } else if (measured > 0.0) {
    ratio = std::numeric_limits<double>::infinity();
  }
  r.max_ratio = std::max(r.max_ratio, ratio);
  if (measured > bound * (1.0 + kEnvelopeBudget)) ++r.violations;
}

// Smooth field supported by the grid box: one entry per slow axis in the first Q row.
DerivativeField smooth_bump(const GridSpec& grid) {
  DerivativeField f(grid);
  const int m = grid.m();
  for (int j = 0; j < grid.node_count(); ++j) {
    const Vec p = grid.node(j);
    Mat a = Mat::Zero(grid.q_size(), m);
    for (int i = 0; i < m; ++i) {
      const double x = p[i] / grid.half_width(i);
      a(0, i) = std::sin(M_PI * x) * std::cos(0.5 * M_PI * x);
    }
    f.set_node(j, a);
  }
  return f;
}

}  // namespace

SuiteRunner::SuiteRunner(const Experiment& ex, std::uint64_t seed) : ex_(ex), seed_(seed) {}

const std::vector<std::string>& SuiteRunner::names() {
  static const std::vector<std::string> all{"certification", "distp",       "jnorm",
                                            "dist_theta",    "psi_uniform", "jdistance"};
  return all;
}

SuiteResult SuiteRunner::run(const std::string& name) {
  if (name == "certification") return certification();
  if (name == "distp") return distp();
  if (name == "jnorm") return jnorm();
  if (name == "dist_theta") return dist_theta();
  if (name == "psi_uniform") return psi_uniform();
  if (name == "jdistance") return jdistance();
  throw ConfigError("unknown suite: " + name);
}

const SolvedMember& SuiteRunner::limit_solution() {
  if (!limit_) limit_ = solve_member(ex_.limit, ex_.F0, ex_.theta(), ex_.config.solver);
  return *limit_;
}

const TimeGrid& SuiteRunner::time_grid() {
  if (!tg_) tg_ = resolve_time_grid(ex_.limit, ex_.F0, ex_.config.solver);
  return *tg_;
}

SuiteResult SuiteRunner::certification() {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "certification";
  if (ex_.fixture()) {
    r.skipped = true;
    r.detail = "analytic-fixture: certification skipped";
    r.seconds = seconds_since(t0);
    return r;
  }
  std::vector<const CutoffNonlinearity*> maps{&ex_.F0};
  std::optional<FamilyMember> far;
  double eps_max = 0.0;
  for (double e : ex_.family.eps_grid()) eps_max = std::max(eps_max, e);
  if (eps_max > 0.0) {
    far = ex_.family.instantiate(eps_max);
    maps.push_back(&far->F);
  }
  for (const CutoffNonlinearity* f : maps) {
    ++r.checks;
    try {
      const CertifiedEstimates est = certify_constants(*f, ex_.config.samples.certify, seed_);
      const NonlinearityConstants& c = f->constants();
      if (c.C_F > 0.0) r.max_ratio = std::max(r.max_ratio, est.C_F / c.C_F);
      if (c.L_F > 0.0) r.max_ratio = std::max(r.max_ratio, est.L_F / c.L_F);
      if (c.L > 0.0) r.max_ratio = std::max(r.max_ratio, est.L / c.L);
    } catch (const CertificationError& e) {
      ++r.violations;
      r.certification_failure = true;
      r.detail = e.what();
      break;
    }
  }
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult SuiteRunner::distp() {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "distp";
  const SolvedMember& s = limit_solution();
  const TimeGrid& tg = time_grid();
  const Vec w = ex_.limit.p_weights();
  const double R = ex_.F0.radius();
  const double rate = ex_.gap.lambdas.Lambda0;
  Sampler rng(seed_ + 1);
  for (int k = 0; k < ex_.config.samples.suite_pairs; ++k) {
    const Vec x1 = rng.point(w, rng.uniform(0.0, 1.2 * R));
    const Vec x2 = x1 + rng.point(w, R * std::pow(10.0, rng.uniform(-3.0, 0.0)));
    const Trajectory a = integrate_p_backward(ex_.limit, ex_.F0, s.manifold.phi, x1, tg, false);
    const Trajectory b = integrate_p_backward(ex_.limit, ex_.F0, s.manifold.phi, x2, tg, false);
    const double d0 = alpha_norm(w, a.p[0] - b.p[0]);
    for (std::size_t j = 1; j < a.p.size(); ++j) {
      record(r, alpha_norm(w, a.p[j] - b.p[j]), d0 * std::exp(-rate * a.s[j]));
    }
  }
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult SuiteRunner::jnorm() {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "jnorm";
  const SolvedMember& s = limit_solution();
  const TimeGrid& tg = time_grid();
  const Vec w = ex_.limit.p_weights();
  const double rate = ex_.gap.lambdas.Lambda0;
  Sampler rng(seed_ + 2);
  for (int k = 0; k < ex_.config.samples.suite_pairs; ++k) {
    const Vec xi = rng.point(w, rng.uniform(0.0, 1.2 * ex_.F0.radius()));
    const ThetaTrajectory th =
        integrate_Theta(ex_.limit, ex_.F0, s.manifold.phi, s.derivative.field, xi, tg, false);
    for (std::size_t j = 0; j < th.Theta.size(); ++j) {
      record(r, p_op_norm(w, th.Theta[j]), std::exp(-rate * th.s[j]));
    }
  }
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult SuiteRunner::dist_theta() {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "dist_theta";
  const SolvedMember& s = limit_solution();
  const TimeGrid& tg = time_grid();
  const Vec w = ex_.limit.p_weights();
  const double theta = ex_.theta();
  const double lf = ex_.constants.L_F;
  const double M = std::max(ex_.gap.M0, holder_certificate(s.derivative.field, theta));
  const double K = lf > 0.0 ? 2.0 * ex_.constants.L / ((theta + 1.0) * lf) + M / (2.0 * (theta + 1.0))
                            : std::numeric_limits<double>::infinity();
  const double am = std::pow(ex_.limit.lambda_m(), ex_.limit.alpha());
  const double rate = 2.0 * (theta + 2.0) * lf * am + (theta + 1.0) * ex_.limit.lambda_m();
  Sampler rng(seed_ + 3);
  for (int k = 0; k < ex_.config.samples.suite_pairs; ++k) {
    const Vec x1 = rng.point(w, rng.uniform(0.0, 1.2 * ex_.F0.radius()));
    const Vec x2 = x1 + rng.point(w, ex_.F0.radius() * std::pow(10.0, rng.uniform(-3.0, 0.0)));
    const ThetaTrajectory a =
        integrate_Theta(ex_.limit, ex_.F0, s.manifold.phi, s.derivative.field, x1, tg, false);
    const ThetaTrajectory b =
        integrate_Theta(ex_.limit, ex_.F0, s.manifold.phi, s.derivative.field, x2, tg, false);
    const double scale = K * std::pow(alpha_norm(w, x1 - x2), theta);
    for (std::size_t j = 1; j < a.Theta.size(); ++j) {
      const double d = p_op_norm(w, a.Theta[j] - b.Theta[j]);
      if (std::isinf(K)) {
        record(r, d, d > 0.0 ? 0.0 : 1.0);
      } else {
        record(r, d, scale * std::exp(-rate * a.s[j]));
      }
    }
  }
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult SuiteRunner::psi_uniform() {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "psi_uniform";
  const SolvedMember& s = limit_solution();
  const TimeGrid& tg = time_grid();
  const GapReport& g = ex_.gap;
  const double theta = 0.5 * g.theta_tilde;
  const Exponents e = exponents(g.inputs, theta);
  const double M = m0_bound(ex_.limit.lambda_m1(), ex_.constants.L_F, ex_.constants.L,
                            ex_.limit.alpha(), e.Lambda2);

  const DerivativeField& solved = s.derivative.field;
  const GridSpec& grid = solved.spec();
  std::vector<DerivativeField> inputs{DerivativeField(grid), solved};
  const DerivativeField bump = smooth_bump(grid);
  const double bump_cert = holder_certificate(bump, theta);
  const double room = std::max(0.0, M - holder_certificate(solved, theta));
  const double norm_room = std::max(0.0, 1.0 - solved.sup_norm());
  double amp = 0.5 * norm_room / std::max(bump.sup_norm(), 1e-300);
  if (bump_cert > 0.0) amp = std::min(amp, 0.5 * room / bump_cert);
  DerivativeField shifted = solved;
  shifted.values() += amp * bump.values();
  inputs.push_back(std::move(shifted));

  char buf[160];
  std::string detail;
  for (const DerivativeField& in : inputs) {
    const double cin = holder_certificate(in, theta);
    const DerivativeField out = apply_D(ex_.limit, ex_.F0, s.manifold.phi, in, tg);
    const double cout = holder_certificate(out, theta);
    ++r.checks;
    const double ratio = M > 0.0 ? cout / M : (cout > 0.0 ? INFINITY : 0.0);
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (cin > M * (1.0 + 1e-12) || cout > 1.1 * M) ++r.violations;
    ++r.checks;
    if (out.sup_norm() > 1.0 + 1e-12) ++r.violations;
    std::snprintf(buf, sizeof buf, "%sin %.3e out %.3e", detail.empty() ? "" : "; ", cin, cout);
    detail += buf;
  }
  std::snprintf(buf, sizeof buf, "; theta %.4g M %.4e", theta, M);
  r.detail = detail + buf;
  r.seconds = seconds_since(t0);
  return r;
}

SuiteResult SuiteRunner::jdistance(double eps) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "jdistance";
  const SolvedMember& s0 = limit_solution();
  const FamilyMember mem = ex_.family.instantiate(eps);
  const SolvedMember se = solve_member(mem.problem, mem.F, ex_.theta(), ex_.config.solver);
  const Comparison cmp{ex_.limit, mem.problem, mem.pair};
  const EvalLattice lattice(s0.manifold.phi.spec());

  ThetaComparisonInputs in;
  in.tau = resolvent_deficiency(ex_.limit, mem.problem, mem.pair);
  in.rho = rho_eps(ex_.F0, mem.F, mem.pair, ex_.config.samples.rho, seed_ + 5);
  in.beta = beta_eps(cmp, ex_.F0, mem.F, s0.manifold.phi);
  in.d_c1 = c1_distance(cmp, se.derivative.field, s0.derivative.field, lattice);
  in.theta = ex_.theta();
  in.kappa = ex_.kappa;
  in.L_F = ex_.constants.L_F;
  in.seed = seed_ + 4;
  const ThetaComparisonResult res =
      theta_comparison(cmp, ex_.F0, s0, mem.F, se, time_grid(), in);
  r.checks = res.validation;
  r.violations = res.violations;
  r.max_ratio = res.max_ratio;
  char buf[160];
  std::snprintf(buf, sizeof buf, "eps %.3g prefactor %.4e calibration %d validation %d", eps,
                res.prefactor, res.calibration, res.validation);
  r.detail = buf;
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace imlab

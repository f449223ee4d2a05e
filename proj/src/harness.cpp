#include "imlab/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "imlab/errors.h"
#include "imlab/parallel.h"
#include "imlab/sampling.h"
#include "json.hpp"

namespace imlab {

PerturbationFamily::PerturbationFamily(SpectralProblem limit, PerturbedNonlinearityPair nonlinearity,
                                       ExtensionRule extension, std::vector<double> eps_grid)
    : limit_(std::move(limit)),
      nonlinearity_(std::move(nonlinearity)),
      extension_(extension),
      eps_grid_(std::move(eps_grid)) {
  for (double e : eps_grid_) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("eps grid entries must be finite and >= 0");
  }
  if (nonlinearity_.limit().dim() != limit_.size()) throw DimensionError("family: F0 dimension");
}

SpectralProblem PerturbationFamily::perturbed_problem(double eps) const {
  std::vector<double> eig(limit_.eigenvalues().begin(), limit_.eigenvalues().end());
  for (double& l : eig) l *= 1.0 + eps;
  return SpectralProblem(std::move(eig), limit_.m(), limit_.alpha());
}

ExtensionPair PerturbationFamily::pair(double eps) const {
  const SpectralProblem pert = perturbed_problem(eps);
  const double angle = extension_.angle_per_eps * eps;
  if (extension_.kind == ExtensionRule::Kind::Identity || angle == 0.0) {
    return ExtensionPair::identity(limit_, pert);
  }
  return ExtensionPair::givens(limit_, pert, extension_.i, extension_.j, angle);
}

FamilyMember PerturbationFamily::instantiate(double eps) const {
  if (!(eps >= 0.0)) throw ConfigError("eps must be nonnegative");
  if (eps == 0.0) {
    return {0.0, limit_, nonlinearity_.limit(), ExtensionPair::identity(limit_, limit_)};
  }
  SpectralProblem pert = perturbed_problem(eps);
  ExtensionPair pr = pair(eps);
  CutoffNonlinearity f = nonlinearity_.at(eps, limit_, pert, pr);
  return {eps, std::move(pert), std::move(f), std::move(pr)};
}

NonlinearityConstants family_bound_constants(const SpectralProblem& limit,
                                             const PerturbedNonlinearityPair& nonlinearity,
                                             const ExtensionRule& extension,
                                             const std::vector<double>& eps_grid) {
  NonlinearityConstants out = nonlinearity.limit().bound_constants();
  const PerturbationFamily fam(limit, nonlinearity, extension, eps_grid);
  for (double e : eps_grid) {
    if (e == 0.0) continue;
    const NonlinearityConstants c = fam.instantiate(e).F.bound_constants();
    out.C_F = std::max(out.C_F, c.C_F);
    out.L_F = std::max(out.L_F, c.L_F);
    out.L = std::max(out.L, c.L);
  }
  out.theta_F = 1.0;
  return out;
}

SolvedMember solve_member(const SpectralProblem& problem, const CutoffNonlinearity& F, double theta,
                          const SolveSettings& settings) {
  ManifoldSolution man = solve_manifold(problem, F, settings);
  DerivativeSolution der = solve_derivative(problem, F, man, theta, settings);
  return {std::move(man), std::move(der)};
}

EvalLattice::EvalLattice(const GridSpec& grid) : m_(grid.m()), n_(2 * grid.nodes_per_axis() - 1) {
  for (int i = 0; i < m_; ++i) {
    lo_[i] = -grid.half_width(i);
    step_[i] = 0.5 * grid.spacing(i);
  }
}

Vec EvalLattice::point(int index) const {
  const auto mi = multi(index);
  Vec z(m_);
  for (int i = 0; i < m_; ++i) z[i] = lo_[i] + step_[i] * mi[i];
  return z;
}

std::vector<std::array<int, 2>> EvalLattice::dyadic_pairs() const {
  std::vector<std::array<int, 2>> offsets;
  for (int s = 1; s < n_; s *= 2) {
    offsets.push_back({s, 0});
    if (m_ == 2) {
      offsets.push_back({0, s});
      offsets.push_back({s, s});
      offsets.push_back({s, -s});
    }
  }
  std::vector<std::array<int, 2>> pairs;
  for (int a = 0; a < size(); ++a) {
    const auto mi = multi(a);
    for (const auto& off : offsets) {
      const int i0 = mi[0] + off[0];
      const int i1 = mi[1] + off[1];
      if (i0 >= n_ || i1 < 0 || (m_ == 2 && i1 >= n_) || (m_ == 1 && i1 != 0)) continue;
      pairs.push_back({a, flat(i0, i1)});
    }
  }
  return pairs;
}

namespace {

Mat slow_block(const ExtensionPair& pair, int m) { return pair.extend().topLeftCorner(m, m); }

/// Full-space vector [0; q].
Vec lift_q(int m, const Vec& q) {
  Vec v = Vec::Zero(m + q.size());
  v.tail(q.size()) = q;
  return v;
}

Mat lift_q(int m, const Mat& q) {
  Mat v = Mat::Zero(m + q.rows(), q.cols());
  v.bottomRows(q.rows()) = q;
  return v;
}

/// E [0; DPsi_0(z)] - [0; DPsi_eps(B z)] B, weighted into the perturbed alpha norm.
Mat derivative_difference(const Comparison& c, const Mat& b, const DerivativeField& field_eps,
                          const DerivativeField& field0, const Vec& z) {
  const int m = c.limit.m();
  const Mat left = c.pair.extend() * lift_q(m, field0.eval(z));
  const Mat right = lift_q(m, field_eps.eval(b * z)) * b;
  return c.perturbed.weights().asDiagonal() * (left - right) *
         c.limit.p_weights().cwiseInverse().asDiagonal();
}

}  // namespace

double beta_eps(const Comparison& c, const CutoffNonlinearity& F0, const CutoffNonlinearity& Feps,
                const GraphFunction& manifold0, int refine) {
  if (refine < 1) throw DomainError("beta_eps: refine must be >= 1");
  const GridSpec& g = manifold0.spec();
  const int per_axis = (g.nodes_per_axis() - 1) * refine + 1;
  const int m = g.m();
  const int count = m == 1 ? per_axis : per_axis * per_axis;
  const Mat& e = c.pair.extend();
  const Vec inv_w0 = c.limit.weights().cwiseInverse();
  std::vector<double> vals(static_cast<std::size_t>(count), 0.0);
  parallel_for(count, Exec::Parallel, [&](std::ptrdiff_t idx) {
    const int i0 = m == 1 ? static_cast<int>(idx) : static_cast<int>(idx) / per_axis;
    const int i1 = m == 1 ? 0 : static_cast<int>(idx) % per_axis;
    Vec p(m);
    p[0] = -g.half_width(0) + g.spacing(0) * i0 / refine;
    if (m == 2) p[1] = -g.half_width(1) + g.spacing(1) * i1 / refine;
    const Vec u = graph_point(c.limit, manifold0, p);
    const Mat d = Feps.jacobian(c.pair.apply_extend(u)) * e - e * F0.jacobian(u);
    vals[idx] = op_norm(d * inv_w0.asDiagonal());
  });
  return *std::max_element(vals.begin(), vals.end());
}

double sup_distance(const Comparison& c, const GraphFunction& phi_eps, const GraphFunction& phi0,
                    const EvalLattice& lattice) {
  const int m = c.limit.m();
  const Mat b = slow_block(c.pair, m);
  std::vector<double> vals(static_cast<std::size_t>(lattice.size()), 0.0);
  parallel_for(lattice.size(), Exec::Parallel, [&](std::ptrdiff_t k) {
    const Vec z = lattice.point(static_cast<int>(k));
    const Vec diff = lift_q(m, phi_eps.eval(b * z)) - c.pair.apply_extend(lift_q(m, phi0.eval(z)));
    vals[k] = diff.cwiseProduct(c.perturbed.weights()).norm();
  });
  return *std::max_element(vals.begin(), vals.end());
}

double c1_distance(const Comparison& c, const DerivativeField& field_eps,
                   const DerivativeField& field0, const EvalLattice& lattice) {
  const Mat b = slow_block(c.pair, c.limit.m());
  std::vector<double> vals(static_cast<std::size_t>(lattice.size()), 0.0);
  parallel_for(lattice.size(), Exec::Parallel, [&](std::ptrdiff_t k) {
    const Vec z = lattice.point(static_cast<int>(k));
    vals[k] = op_norm(derivative_difference(c, b, field_eps, field0, z));
  });
  return *std::max_element(vals.begin(), vals.end());
}

C1ThetaDistance c1theta_distance(const Comparison& c, const GraphFunction& phi_eps,
                                 const GraphFunction& phi0, const DerivativeField& field_eps,
                                 const DerivativeField& field0, double theta, double theta_star,
                                 const EvalLattice& lattice) {
  if (!(theta >= 0.0) || !(theta_star > theta) || theta_star > 1.0) {
    throw AdmissibilityError("c1theta_distance: need 0 <= theta < theta_star <= 1");
  }
  const int m = c.limit.m();
  const Mat b = slow_block(c.pair, m);
  const Vec& we = c.perturbed.weights();
  const Vec inv_w0p = c.limit.p_weights().cwiseInverse();
  const int n = lattice.size();

  std::vector<Mat> delta(static_cast<std::size_t>(n));
  std::vector<Mat> left(static_cast<std::size_t>(n));
  std::vector<Mat> right(static_cast<std::size_t>(n));
  parallel_for(n, Exec::Parallel, [&](std::ptrdiff_t k) {
    const Vec z = lattice.point(static_cast<int>(k));
    left[k] = we.asDiagonal() * (c.pair.extend() * lift_q(m, field0.eval(z))) * inv_w0p.asDiagonal();
    right[k] = we.asDiagonal() * (lift_q(m, field_eps.eval(b * z)) * b) * inv_w0p.asDiagonal();
    delta[k] = left[k] - right[k];
  });

  C1ThetaDistance out;
  out.d_sup = sup_distance(c, phi_eps, phi0, lattice);
  for (const Mat& d : delta) out.d_c1 = std::max(out.d_c1, op_norm(d));

  const auto pairs = lattice.dyadic_pairs();
  std::vector<double> hol(pairs.size(), 0.0);
  std::vector<double> cert(pairs.size(), 0.0);
  const Vec w0p = c.limit.p_weights();
  parallel_for(static_cast<std::ptrdiff_t>(pairs.size()), Exec::Parallel, [&](std::ptrdiff_t k) {
    const int a = pairs[k][0];
    const int bb = pairs[k][1];
    const double dz = (lattice.point(a) - lattice.point(bb)).cwiseProduct(w0p).norm();
    hol[k] = op_norm(delta[a] - delta[bb]) / std::pow(dz, theta);
    cert[k] = (op_norm(left[a] - left[bb]) + op_norm(right[a] - right[bb])) / std::pow(dz, theta_star);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.holder_diff = std::max(out.holder_diff, hol[k]);
    out.certificate = std::max(out.certificate, cert[k]);
  }
  out.d_c1theta = out.d_sup + out.d_c1 + out.holder_diff;
  const double r = theta / theta_star;
  out.interp_bound = std::pow(out.certificate, r) * std::pow(2.0 * out.d_c1, 1.0 - r);
  return out;
}

ThetaComparisonResult theta_comparison(const Comparison& c, const CutoffNonlinearity& F0,
                                       const SolvedMember& s0, const CutoffNonlinearity& Feps,
                                       const SolvedMember& seps, const TimeGrid& tg,
                                       const ThetaComparisonInputs& in) {
  const int m = c.limit.m();
  const Mat b = slow_block(c.pair, m);
  const double lm = c.perturbed.lambda_m();
  const double am = std::pow(lm, c.perturbed.alpha());
  const double a3 = (4.0 + (in.kappa + 2.0) * in.theta) * in.L_F * am + (in.theta + 1.0) * lm + 3.0 * in.theta;
  const double a4 = 4.0 * in.L_F * am + lm;
  const double amp = in.beta + std::pow(log_bound(in.tau, in.rho), in.theta);

  TimeGrid run;
  run.steps = std::max(1, static_cast<int>(std::ceil(in.t_max / tg.h - 1e-12)));
  run.h = in.t_max / run.steps;
  run.T = in.t_max;

  // Calibration covers the support ball with a lattice at every time node;
  // validation draws held-out points at random times.
  const Vec w0 = c.limit.p_weights();
  const double R = F0.radius();
  std::vector<Vec> xis;
  std::vector<std::vector<int>> picks;
  std::vector<int> all_steps;
  for (int k = 1; k <= run.steps; ++k) all_steps.push_back(k);
  const int na = std::max(2, m == 1 ? in.calibration_per_axis : in.calibration_per_axis / 4);
  const int total = m == 1 ? na : na * na;
  for (int idx = 0; idx < total; ++idx) {
    Vec xi(m);
    const int ij[2] = {m == 1 ? idx : idx / na, idx % na};
    for (int i = 0; i < m; ++i) xi[i] = R / w0[i] * (-1.0 + 2.0 * ij[i] / (na - 1));
    if (w0.cwiseProduct(xi).norm() > R * (1.0 + 1e-12)) continue;
    xis.push_back(xi);
    picks.push_back(all_steps);
  }
  const std::size_t n_cal_xi = xis.size();
  Sampler rng(in.seed);
  for (int s = 0; s < in.xi_samples; ++s) {
    xis.push_back(rng.point(w0, rng.uniform(0.0, R)));
    std::vector<int> ks;
    for (int j = 0; j < in.t_per_xi; ++j) ks.push_back(1 + rng.index(run.steps));
    picks.push_back(std::move(ks));
  }

  const Vec wp_e = c.perturbed.p_weights();
  const Vec inv_wp0 = c.limit.p_weights().cwiseInverse();
  std::vector<std::vector<double>> lhs(xis.size());
  parallel_for(static_cast<std::ptrdiff_t>(xis.size()), Exec::Parallel, [&](std::ptrdiff_t s) {
    const ThetaTrajectory t0 = integrate_Theta(c.limit, F0, s0.manifold.phi, s0.derivative.field,
                                               xis[s], run, false);
    const ThetaTrajectory te = integrate_Theta(c.perturbed, Feps, seps.manifold.phi,
                                               seps.derivative.field, b * xis[s], run, false);
    for (int k : picks[s]) {
      const Mat d = b * t0.Theta[k] - te.Theta[k] * b;
      lhs[s].push_back(op_norm(wp_e.asDiagonal() * d * inv_wp0.asDiagonal()));
    }
  });

  ThetaComparisonResult res;
  std::vector<bool> is_cal;
  for (std::size_t s = 0; s < xis.size(); ++s) {
    for (std::size_t j = 0; j < picks[s].size(); ++j) {
      const double t = -picks[s][j] * run.h;
      res.t.push_back(t);
      res.lhs.push_back(lhs[s][j]);
      res.shape.push_back(amp * std::exp(-a3 * t));
      res.c1_term.push_back(0.5 * in.d_c1 * std::exp(-a4 * t));
      is_cal.push_back(s < n_cal_xi);
    }
  }
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    if (!is_cal[k]) continue;
    ++res.calibration;
    const double excess = res.lhs[k] - res.c1_term[k];
    if (excess > 0.0 && res.shape[k] > 0.0) res.prefactor = std::max(res.prefactor, excess / res.shape[k]);
  }
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    if (is_cal[k]) continue;
    ++res.validation;
    const double env = res.prefactor * res.shape[k] + res.c1_term[k];
    const double ratio = env > 0.0 ? res.lhs[k] / env : (res.lhs[k] > 0.0 ? INFINITY : 0.0);
    res.max_ratio = std::max(res.max_ratio, ratio);
    if (res.lhs[k] > env * (1.0 + 1e-8)) ++res.violations;
  }
  return res;
}

double log_bound(double tau, double rho) {
  const double tl = tau > 0.0 ? tau * std::abs(std::log(tau)) : 0.0;
  return tl + rho;
}

ConstantFit fit_constant(const std::vector<double>& d, const std::vector<double>& b,
                         const std::vector<bool>& calibration, std::vector<bool>* pass) {
  ConstantFit fit;
  double log_sum = 0.0;
  int log_n = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (b[k] > 0.0 && d[k] > 0.0) {
      log_sum += std::log(d[k] / b[k]);
      ++log_n;
    }
    if (!calibration[k] || !(b[k] > 0.0)) continue;
    ++fit.calibration_rows;
    fit.C = std::max(fit.C, d[k] / b[k]);
  }
  fit.C_lsq = log_n > 0 ? std::exp(log_sum / log_n) : 0.0;
  if (pass) pass->assign(d.size(), false);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const bool ok = std::isfinite(d[k]) && d[k] <= fit.C * b[k] * (1.0 + 1e-12);
    if (pass) (*pass)[k] = ok;
    fit.all_pass = fit.all_pass && ok;
  }
  return fit;
}

bool DistanceReport::all_pass() const {
  for (const auto& r : rows) {
    if (!r.pass_sup || !r.pass_c1theta || !r.interp_pass) return false;
  }
  return monotone_sup;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::ordered_json fit_json(const ConstantFit& f) {
  return {{"C", f.C}, {"C_lsq", f.C_lsq}, {"calibration_rows", f.calibration_rows},
          {"all_pass", f.all_pass}};
}

}  // namespace

std::string DistanceReport::to_csv() const {
  std::string out =
      "eps,tau,rho,beta,d_sup,d_c1,holder_diff,d_c1theta,bound_sup,bound_c1theta,fitted_C_sup,"
      "fitted_C_c1theta,pass_sup,pass_c1theta\n";
  for (const auto& r : rows) {
    const double cols[] = {r.eps,       r.tau,        r.rho,       r.beta,     r.d_sup,
                           r.d_c1,      r.holder_diff, r.d_c1theta, r.bound_sup, r.bound_c1theta,
                           fit_sup.C,   fit_c1theta.C};
    for (double v : cols) out += num(v) + ",";
    out += std::string(r.pass_sup ? "true" : "false") + "," + (r.pass_c1theta ? "true" : "false") + "\n";
  }
  return out;
}

std::string DistanceReport::to_json(const std::string& extra_metadata_json) const {
  nlohmann::ordered_json j;
  if (!extra_metadata_json.empty()) j["metadata"] = nlohmann::ordered_json::parse(extra_metadata_json);
  j["theta"] = theta;
  j["theta_star"] = theta_star;
  j["M0"] = M0;
  j["kappa"] = kappa;
  j["limit"] = {{"lipschitz_certificate", limit_lipschitz},
                {"holder_certificate", limit_holder},
                {"iterations", limit_iterations}};
  j["fits"] = {{"sup", fit_json(fit_sup)},
               {"c1theta", fit_json(fit_c1theta)},
               {"sup_without_log", fit_json(fit_sup_nolog)},
               {"c1theta_without_log", fit_json(fit_c1theta_nolog)}};
  j["monotone_sup"] = monotone_sup;
  j["all_pass"] = all_pass();
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"eps", r.eps},
                         {"tau", r.tau},
                         {"rho", r.rho},
                         {"beta", r.beta},
                         {"delta", r.delta},
                         {"d_sup", r.d_sup},
                         {"d_c1", r.d_c1},
                         {"holder_diff", r.holder_diff},
                         {"d_c1theta", r.d_c1theta},
                         {"bound_sup", r.bound_sup},
                         {"bound_c1theta", r.bound_c1theta},
                         {"certificate", r.certificate},
                         {"interp_bound", r.interp_bound},
                         {"interp_bound_m0", r.interp_bound_m0},
                         {"interp_pass", r.interp_pass},
                         {"calibration", r.calibration},
                         {"pass_sup", r.pass_sup},
                         {"pass_c1theta", r.pass_c1theta}});
  }
  j["rows"] = rows_json;
  return j.dump(2);
}

DistanceReport rate_study(const PerturbationFamily& family, double theta, double theta_star,
                          const SolveSettings& settings, const StudyOptions& options) {
  const SpectralProblem& limit = family.limit();
  const CutoffNonlinearity& F0 = family.limit_F();
  const NonlinearityConstants& fc = family.nonlinearity().family_constants();

  double kappa = 1.0;
  for (double e : family.eps_grid()) kappa = std::max(kappa, family.pair(e).kappa());

  const GapInputs gin{limit.lambda_m(), limit.lambda_m1(), fc.L_F, kappa, limit.alpha()};
  if (!check_gap(gin).pass) throw AdmissibilityError("rate_study: gap conditions fail at eps = 0");
  const double tt = theta_tilde(fc.theta_F, theta0(gin), theta1(gin));
  if (!(theta > 0.0 && theta < theta_star && theta_star < tt)) {
    throw AdmissibilityError("rate_study: need 0 < theta < theta_star < theta_tilde");
  }

  DistanceReport rep;
  rep.theta = theta;
  rep.theta_star = theta_star;
  rep.kappa = kappa;
  const Exponents ex = exponents(gin, theta_star);
  rep.M0 = m0_bound(limit.lambda_m1(), fc.L_F, fc.L, limit.alpha(), ex.Lambda2);

  const SolvedMember s0 = solve_member(limit, F0, theta_star, settings);
  const EvalLattice lattice(s0.manifold.phi.spec());
  rep.limit_lipschitz = lipschitz_certificate(s0.manifold.phi, 1000, options.seed);
  rep.limit_holder = holder_certificate(s0.derivative.field, theta_star);
  rep.limit_iterations = s0.manifold.log.iterations;

  for (double eps : family.eps_grid()) {
    const FamilyMember mem = family.instantiate(eps);
    DistanceRow row;
    row.eps = eps;
    const Comparison cmp{limit, mem.problem, mem.pair};
    std::optional<SolvedMember> solved_storage;
    const SolvedMember* se = &s0;
    if (eps != 0.0) {
      try {
        solved_storage = solve_member(mem.problem, mem.F, theta_star, settings);
      } catch (const std::exception& err) {
        char msg[64];
        std::snprintf(msg, sizeof msg, "rate_study failed at eps = %.6g: ", eps);
        throw NumericalError(msg + std::string(err.what()));
      }
      se = &*solved_storage;
    }
    row.tau = resolvent_deficiency(limit, mem.problem, mem.pair);
    row.rho = rho_eps(F0, mem.F, mem.pair, options.rho_samples, options.seed);
    row.beta = beta_eps(cmp, F0, mem.F, s0.manifold.phi);
    row.delta = norm_equivalence_delta(limit, mem.problem);
    const C1ThetaDistance d = c1theta_distance(cmp, se->manifold.phi, s0.manifold.phi,
                                               se->derivative.field, s0.derivative.field, theta,
                                               theta_star, lattice);
    row.d_sup = d.d_sup;
    row.d_c1 = d.d_c1;
    row.holder_diff = d.holder_diff;
    row.d_c1theta = d.d_c1theta;
    row.certificate = d.certificate;
    row.interp_bound = d.interp_bound;
    const double r = theta / theta_star;
    row.interp_bound_m0 = std::pow(rep.M0 * kappa * (kappa + 1.0), r) /
                          std::pow(1.0 - row.delta, theta) * std::pow(2.0 * d.d_c1, 1.0 - r);
    row.interp_pass = d.holder_diff <= d.interp_bound * (1.0 + 1e-12);
    const double lb = log_bound(row.tau, row.rho);
    row.bound_sup = lb;
    row.bound_c1theta = std::pow(row.beta + std::pow(lb, theta_star), 1.0 - r);
    rep.rows.push_back(row);
  }

  std::vector<std::size_t> order(rep.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rep.rows[a].eps > rep.rows[b].eps; });
  std::size_t positive = 0;
  for (const auto& r : rep.rows) positive += r.eps > 0.0 ? 1 : 0;
  const std::size_t n_cal = (positive + 1) / 2;
  for (std::size_t k = 0; k < order.size() && k < n_cal; ++k) rep.rows[order[k]].calibration = true;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double prev = rep.rows[order[k - 1]].d_sup;
    if (rep.rows[order[k]].d_sup > prev * (1.0 + 1e-9) + 1e-15) rep.monotone_sup = false;
  }

  std::vector<double> dsup, dth, bsup, bth, bsup_nl, bth_nl;
  std::vector<bool> cal;
  for (const auto& r : rep.rows) {
    dsup.push_back(r.d_sup);
    dth.push_back(r.d_c1theta);
    bsup.push_back(r.bound_sup);
    bth.push_back(r.bound_c1theta);
    bsup_nl.push_back(r.tau + r.rho);
    bth_nl.push_back(std::pow(r.beta + std::pow(r.tau + r.rho, theta_star), 1.0 - theta / theta_star));
    cal.push_back(r.calibration);
  }
  std::vector<bool> pass_sup, pass_th;
  rep.fit_sup = fit_constant(dsup, bsup, cal, &pass_sup);
  rep.fit_c1theta = fit_constant(dth, bth, cal, &pass_th);
  rep.fit_sup_nolog = fit_constant(dsup, bsup_nl, cal);
  rep.fit_c1theta_nolog = fit_constant(dth, bth_nl, cal);
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    rep.rows[k].pass_sup = pass_sup[k];
    rep.rows[k].pass_c1theta = pass_th[k];
  }
  return rep;
}

}  // namespace imlab

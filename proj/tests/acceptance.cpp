#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "imlab/config.h"
#include "imlab/gap.h"
#include "imlab/harness.h"
#include "imlab/lyapunov_perron.h"
#include "imlab/suites.h"

using namespace imlab;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

struct Solved {
  Experiment ex;
  ManifoldSolution psi;
  DerivativeSolution ups;
};

Solved solve_config(const std::string& json) {
  Experiment ex = build_experiment(parse_config(json));
  ManifoldSolution psi = solve_manifold(ex.limit, ex.F0, ex.config.solver);
  DerivativeSolution ups = solve_derivative(ex.limit, ex.F0, psi, ex.theta(), ex.config.solver);
  return {std::move(ex), std::move(psi), std::move(ups)};
}

}  // namespace

int main() {
  criterion(1, "analytic fixtures", [] {
    const auto t0 = Clock::now();
    const Solved z = solve_config(
        R"({"nonlinearity": {"model": "zero", "G": {"model": "zero"}}, "family": {"eps_grid": [0.0]}})");
    const double zphi = z.psi.phi.values().cwiseAbs().maxCoeff();
    double zd = 0.0;
    for (int j = 0; j < z.ups.field.spec().node_count(); ++j) {
      zd = std::max(zd, z.ups.field.node_value(j).cwiseAbs().maxCoeff());
    }
    const Solved c = solve_config(
        R"({"spectrum": {"eigenvalues": [1.0, 4.0], "m": 1},
            "nonlinearity": {"model": "constant", "value": [0.0, 1.0], "cutoff": false, "G": {"model": "zero"}},
            "solver": {"grid_nodes": 41}, "family": {"eps_grid": [0.0]}})");
    const double cerr = (c.psi.phi.values().array() - 0.25).abs().maxCoeff();
    const double secs = since(t0);
    const bool ok = zphi <= 1e-14 && zd <= 1e-14 && cerr <= 1e-10 && secs < 1.0;
    return Outcome{ok, fmt("zero |Phi| %.3g |DPsi| %.3g, constant |Phi - 0.25| %.3g, %.3f s", zphi, zd, cerr, secs)};
  });

  criterion(2, "gap formula golden values", [] {
    const auto t0 = Clock::now();
    const GapInputs in{10.0, 100.0, 0.5, 1.0, 0.0};
    const Exponents e = exponents(in, 0.5);
    const double m0 = m0_bound(100.0, 0.5, 1.0, 0.0, e.Lambda2);
    const double tol = 1e-12;
    bool ok = close(theta0(in), 87.0 / 11.0, tol) && close(theta1(in), 88.0 / 14.5, tol) &&
              close(e.Lambda0, 11.0, tol) && close(e.Lambda1, 83.5, tol) && close(e.Lambda2, 82.5, tol) &&
              close(e.Lambda3, 81.75, tol) && close(e.Lambda4, 80.75, tol) && close(m0, 8.0 / 81.5, tol);
    const double secs = since(t0);
    ok = ok && secs < 0.1;
    return Outcome{ok, fmt("theta0 %.15g theta1 %.15g M0 %.15g, %.4f s", theta0(in), theta1(in), m0, secs)};
  });

  const Experiment ex = build_experiment(parse_config("{}"));

  criterion(3, "Gronwall envelope suites", [&] {
    const auto t0 = Clock::now();
    SuiteRunner runner(ex, ex.config.seed);
    std::string detail;
    bool ok = true;
    for (const char* name : {"distp", "jnorm", "dist_theta"}) {
      const SuiteResult r = runner.run(name);
      ok = ok && r.violations == 0 && r.checks > 0;
      detail += std::string(name) + fmt(" %.0f/%.0f max_ratio %.6f; ", r.violations, r.checks, r.max_ratio);
    }
    const double secs = since(t0);
    ok = ok && secs < 30.0;
    return Outcome{ok, detail + fmt("%.2f s", secs)};
  });

  criterion(4, "fiber contraction and regularity", [&] {
    const auto t0 = Clock::now();
    const ManifoldSolution psi = solve_manifold(ex.limit, ex.F0, ex.config.solver);
    double worst = 0.0;
    for (double x : psi.log.ratios) worst = std::max(worst, x);
    const double lip = lipschitz_certificate(psi.phi, ex.config.samples.lipschitz_pairs, ex.config.seed);
    SuiteRunner runner(ex, ex.config.seed);
    const SuiteResult pu = runner.psi_uniform();
    const double secs = since(t0);
    const bool ok = !psi.log.ratios.empty() && worst < 1.0 && lip < 1.0 && pu.violations == 0 && secs < 60.0;
    return Outcome{ok, fmt("max ratio %.4f, Lipschitz %.4f, Hoelder ratio %.4f, %.2f s", worst, lip,
                           pu.max_ratio, secs)};
  });

  criterion(5, "derivative versus finite differences", [&] {
    const ManifoldSolution psi = solve_manifold(ex.limit, ex.F0, ex.config.solver);
    const DerivativeSolution ups = solve_derivative(ex.limit, ex.F0, psi, ex.theta(), ex.config.solver);
    const GridSpec& g = psi.phi.spec();
    const double dx = g.spacing(0);
    double worst = 0.0;
    for (int j = 1; j + 1 < g.node_count(); ++j) {
      const Vec fd = (psi.phi.values().col(j + 1) - psi.phi.values().col(j - 1)) / (2 * dx);
      worst = std::max(worst, g.op_norm_pq(ups.field.node_value(j) - fd));
    }
    return Outcome{worst <= 1e-4, fmt("max node error %.3g", worst)};
  });

  const auto study_start = Clock::now();
  DistanceReport rep;
  double study_secs = 0.0;
  std::string study_error;
  try {
    rep = rate_study(ex.family, ex.theta(), ex.theta_star(), ex.config.solver,
                     {ex.config.samples.rho, ex.config.seed});
    study_secs = since(study_start);
  } catch (const std::exception& e) {
    study_error = e.what();
  }

  criterion(6, "rate shapes", [&] {
    if (!study_error.empty()) return Outcome{false, "study failed: " + study_error};
    int fail_sup = 0;
    int fail_c1 = 0;
    double lo = 1.0;
    double hi = 0.0;
    for (const DistanceRow& r : rep.rows) {
      fail_sup += r.pass_sup ? 0 : 1;
      fail_c1 += r.pass_c1theta ? 0 : 1;
      lo = std::min(lo, r.eps);
      hi = std::max(hi, r.eps);
    }
    const bool range = lo <= 1e-4 && hi >= 1e-1;
    const bool ok = range && fail_sup == 0 && fail_c1 == 0 && rep.monotone_sup && study_secs < 300.0;
    return Outcome{ok, fmt("C_sup %.4g C_c1theta %.4g, row failures %.0f + %.0f", rep.fit_sup.C,
                           rep.fit_c1theta.C, fail_sup, fail_c1) +
                           (rep.monotone_sup ? ", monotone" : ", not monotone") + fmt(", %.2f s", study_secs)};
  });

  criterion(7, "interpolation split", [&] {
    if (!study_error.empty()) return Outcome{false, "study failed: " + study_error};
    int fails = 0;
    double worst = 0.0;
    for (const DistanceRow& r : rep.rows) {
      fails += r.interp_pass ? 0 : 1;
      if (r.interp_bound > 0.0) worst = std::max(worst, r.holder_diff / r.interp_bound);
    }
    return Outcome{fails == 0 && !rep.rows.empty(),
                   fmt("violations %.0f of %.0f rows, worst ratio %.4f", fails,
                       static_cast<double>(rep.rows.size()), worst)};
  });

  criterion(8, "deterministic report", [&] {
    if (!study_error.empty()) return Outcome{false, "study failed: " + study_error};
    const Experiment again = build_experiment(parse_config("{}"));
    const DistanceReport second = rate_study(again.family, again.theta(), again.theta_star(),
                                             again.config.solver, {again.config.samples.rho, again.config.seed});
    const std::string a = rep.to_csv();
    const std::string b = second.to_csv();
    return Outcome{a == b, fmt("%.0f bytes", static_cast<double>(a.size())) + (a == b ? ", identical" : ", differ")};
  });

  return failures == 0 ? 0 : 1;
}

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.h"
#include "imlab/errors.h"
#include "imlab/lyapunov_perron.h"
#include "imlab/sampling.h"

using namespace imlab;
using imlab::test::make_F;

namespace {

SpectralProblem diag14() { return SpectralProblem({1.0, 4.0}, 1, 0.0); }

CutoffNonlinearity zero_F(const SpectralProblem& p) {
  return make_F(std::make_shared<ConstantMap>(Vec::Zero(p.size())), p);
}

CutoffNonlinearity fixture_F(const SpectralProblem& p, double c = 1.0) {
  Vec v = Vec::Zero(p.size());
  v[1] = c;
  return make_F(std::make_shared<ConstantMap>(v), p, 4.0, false);
}

TimeGrid grid_of(double T, int steps) { return {T, T / steps, steps}; }

struct Solved {
  Experiment ex;
  ManifoldSolution psi;
  DerivativeSolution ups;
};

const Solved& default_solution() {
  static const Solved s = [] {
    Experiment ex = imlab::test::default_experiment();
    ManifoldSolution psi = solve_manifold(ex.limit, ex.F0, ex.config.solver);
    DerivativeSolution ups = solve_derivative(ex.limit, ex.F0, psi, ex.theta(), ex.config.solver);
    return Solved{std::move(ex), std::move(psi), std::move(ups)};
  }();
  return s;
}

}  // namespace

TEST_SUITE("lyapunov_perron") {
  TEST_CASE("linear backward flow") {
    const SpectralProblem p = diag14();
    const CutoffNonlinearity F = zero_F(p);
    GraphFunction phi(make_grid(p, F, {}));
    Vec xi(1);
    xi << 1.0;
    const Trajectory tr = integrate_p_backward(p, F, phi, xi, grid_of(1.0, 50), false);
    CHECK(tr.s.back() == doctest::Approx(-1.0));
    CHECK(tr.p.back()[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  }

  TEST_CASE("equilibrium stays put") {
    const SpectralProblem p = diag14();
    const CutoffNonlinearity F = fixture_F(p);
    GraphFunction phi(make_grid(p, F, {}));
    const Trajectory tr = integrate_p_backward(p, F, phi, Vec::Zero(1), grid_of(2.0, 100), false);
    for (const Vec& x : tr.p) CHECK(x[0] == 0.0);
  }

  TEST_CASE("RK4 converges at fourth order") {
    const SpectralProblem p = diag14();
    const CutoffNonlinearity F = zero_F(p);
    GraphFunction phi(make_grid(p, F, {}));
    Vec xi(1);
    xi << 1.0;
    std::vector<double> lh, le;
    for (int steps : {10, 20, 40, 80}) {
      const Trajectory tr = integrate_p_backward(p, F, phi, xi, grid_of(1.0, steps), false);
      lh.push_back(std::log(1.0 / steps));
      le.push_back(std::log(std::abs(tr.p.back()[0] - std::exp(1.0))));
    }
    const double mh = std::accumulate(lh.begin(), lh.end(), 0.0) / lh.size();
    const double me = std::accumulate(le.begin(), le.end(), 0.0) / le.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lh.size(); ++k) {
      sxy += (lh[k] - mh) * (le[k] - me);
      sxx += (lh[k] - mh) * (lh[k] - mh);
    }
    CHECK(sxy / sxx == doctest::Approx(4.0).epsilon(0.1 / 4.0));
  }

  TEST_CASE("transform of closed-form fixtures") {
    const SpectralProblem p = diag14();
    const CutoffNonlinearity Z = zero_F(p);
    GraphFunction phi0(make_grid(p, Z, {}));
    const TimeGrid tg = resolve_time_grid(p, Z, {});
    CHECK(apply_T(p, Z, phi0, tg).values().isZero(0.0));

    const CutoffNonlinearity F = fixture_F(p);
    GraphFunction phi(make_grid(p, F, {}));
    const GraphFunction t = apply_T(p, F, phi, resolve_time_grid(p, F, {}));
    CHECK((t.values().array() - 0.25).abs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("quadrature tail is bounded analytically") {
    const Experiment ex = imlab::test::default_experiment();
    const SpectralProblem& p = ex.limit;
    GraphFunction phi(make_grid(p, ex.F0, ex.config.solver));
    const double h = ex.config.solver.h;
    for (double T : {0.5, 1.0, 2.0}) {
      const int k = static_cast<int>(std::lround(T / h));
      const GraphFunction a = apply_T(p, ex.F0, phi, grid_of(T, k));
      const GraphFunction b = apply_T(p, ex.F0, phi, grid_of(2 * T, 2 * k));
      const double bound = std::exp(-p.lambda_m1() * T) * ex.F0.constants().C_F / p.lambda_m1();
      CHECK((b.values() - a.values()).cwiseAbs().maxCoeff() <= bound);
    }
  }

  TEST_CASE("fixed points of the analytic fixtures") {
    const SpectralProblem p = diag14();
    const ManifoldSolution z = solve_manifold(p, zero_F(p), {});
    CHECK(z.log.iterations == 1);
    CHECK(z.phi.values().isZero(0.0));
    const ManifoldSolution c = solve_manifold(p, fixture_F(p), {});
    CHECK(c.log.iterations == 1);
    CHECK((c.phi.values().array() - 0.25).abs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("default model contracts geometrically") {
    const Solved& s = default_solution();
    const auto& r = s.psi.log.ratios;
    REQUIRE(r.size() >= 2);
    for (double x : r) CHECK(x < 1.0);
    const std::size_t from = r.size() > 5 ? r.size() - 5 : 0;
    CHECK(*std::max_element(r.begin() + from, r.end()) < 1.0);
    std::vector<double> tail(r.begin() + 1, r.end());
    const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / tail.size();
    double var = 0.0;
    for (double x : tail) var += (x - mean) * (x - mean);
    var /= tail.size();
    CHECK(std::sqrt(var) / mean < 0.1);
  }

  TEST_CASE("solved manifold vanishes outside the support ball") {
    const Solved& s = default_solution();
    const GridSpec& g = s.psi.phi.spec();
    int outside = 0;
    for (int j = 0; j < g.node_count(); ++j) {
      if (g.p_norm(g.node(j)) >= s.ex.F0.radius()) {
        ++outside;
        CHECK(s.psi.phi.values().col(j).isZero(0.0));
      }
    }
    CHECK(outside > 0);
  }

  TEST_CASE("linearized flow") {
    const SpectralProblem p = SpectralProblem({1.0, 3.0, 9.0}, 2, 0.0);
    const CutoffNonlinearity F = zero_F(p);
    const GridSpec g = make_grid(p, F, {});
    GraphFunction phi(g);
    DerivativeField ups(g);
    Vec xi(2);
    xi << 0.5, -0.2;
    const ThetaTrajectory th = integrate_Theta(p, F, phi, ups, xi, grid_of(1.0, 50), false);
    CHECK(th.Theta.front() == Mat::Identity(2, 2));
    // RK4 on y' = -lambda y applied backward multiplies by R(lambda h) per step.
    auto rk4 = [](double z) { return 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0; };
    for (std::size_t k = 0; k < th.s.size(); k += 10) {
      const double t = th.s[k];
      const double n = static_cast<double>(k);
      CHECK(th.Theta[k](0, 0) == doctest::Approx(std::pow(rk4(0.02), n)).epsilon(1e-13));
      CHECK(th.Theta[k](1, 1) == doctest::Approx(std::pow(rk4(0.06), n)).epsilon(1e-13));
      CHECK(th.Theta[k](0, 0) == doctest::Approx(std::exp(-t)).epsilon(1e-7));
      CHECK(th.Theta[k](1, 1) == doctest::Approx(std::exp(-3.0 * t)).epsilon(1e-6));
      CHECK(th.Theta[k](0, 1) == 0.0);
    }
  }

  TEST_CASE("derivative map on flat nonlinearities") {
    const SpectralProblem p = diag14();
    for (const CutoffNonlinearity& F : {zero_F(p), fixture_F(p)}) {
      const ManifoldSolution psi = solve_manifold(p, F, {});
      DerivativeField ups(psi.phi.spec());
      for (int j = 0; j < ups.spec().node_count(); ++j) ups.set_node(j, Mat::Constant(1, 1, 0.3));
      CHECK(apply_D(p, F, psi.phi, ups, psi.time).values().isZero(0.0));
      const DerivativeSolution d = solve_derivative(p, F, psi, 0.5, {});
      CHECK(d.field.values().isZero(0.0));
      CHECK(d.log.iterations == 1);
    }
  }

  TEST_CASE("derivative field stays in the unit ball") {
    const Solved& s = default_solution();
    CHECK(s.ups.field.sup_norm() <= 1.0);
    DerivativeField field = s.ups.field;
    for (int k = 0; k < 3; ++k) {
      field = apply_D(s.ex.limit, s.ex.F0, s.psi.phi, field, s.psi.time);
      CHECK(field.sup_norm() <= 1.0);
    }
  }

  TEST_CASE("derivative matches central differences of the manifold") {
    const Solved& s = default_solution();
    const GridSpec& g = s.psi.phi.spec();
    const double dx = g.spacing(0);
    double worst = 0.0;
    for (int j = 1; j + 1 < g.node_count(); ++j) {
      const Vec fd = (s.psi.phi.values().col(j + 1) - s.psi.phi.values().col(j - 1)) / (2 * dx);
      worst = std::max(worst, g.op_norm_pq(s.ups.field.node_value(j) - fd));
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("certificates of the default solution") {
    const Solved& s = default_solution();
    CHECK(lipschitz_certificate(s.psi.phi) < 1.0);
    CHECK(holder_certificate(s.ups.field, s.ex.theta()) <= 1.1 * s.ex.gap.M0);
  }

  TEST_CASE("certificates of closed-form graphs") {
    const SpectralProblem p = SpectralProblem::squares(3, 1, 0.0);
    const GridSpec g(p, 41, 1.5, 4.0);
    GraphFunction zero(g);
    CHECK(lipschitz_certificate(zero) == 0.0);
    GraphFunction half(g);
    for (int j = 0; j < g.node_count(); ++j) half.values()(0, j) = 0.5 * g.node(j)[0];
    CHECK(lipschitz_certificate(half) == doctest::Approx(0.5).epsilon(1e-12));

    DerivativeField flat(g);
    for (int j = 0; j < g.node_count(); ++j) flat.set_node(j, Mat::Constant(2, 1, 0.7));
    CHECK(holder_certificate(flat, 0.5) == 0.0);
    Mat c(2, 1);
    c << 0.3, -0.4;
    DerivativeField lin(g);
    for (int j = 0; j < g.node_count(); ++j) lin.set_node(j, g.node(j)[0] * c);
    CHECK(holder_certificate(lin, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("serial and parallel sweeps agree bitwise") {
    const Solved& s = default_solution();
    const GraphFunction a = apply_T(s.ex.limit, s.ex.F0, s.psi.phi, s.psi.time, Exec::Serial);
    const GraphFunction b = apply_T(s.ex.limit, s.ex.F0, s.psi.phi, s.psi.time, Exec::Parallel);
    CHECK(a.values() == b.values());
    const DerivativeField c = apply_D(s.ex.limit, s.ex.F0, s.psi.phi, s.ups.field, s.psi.time, Exec::Serial);
    const DerivativeField d = apply_D(s.ex.limit, s.ex.F0, s.psi.phi, s.ups.field, s.psi.time, Exec::Parallel);
    CHECK(c.values() == d.values());
  }

  TEST_CASE("solver errors") {
    const Experiment ex = imlab::test::default_experiment();
    SolveSettings st = ex.config.solver;
    st.max_iter = 1;
    CHECK_THROWS_AS(solve_manifold(ex.limit, ex.F0, st), ConvergenceError);
    st = ex.config.solver;
    st.T_horizon = 1000.0;
    CHECK_THROWS_AS(resolve_time_grid(ex.limit, ex.F0, st), NumericalError);
    st = ex.config.solver;
    st.h = 0.5;
    CHECK_THROWS_AS(resolve_time_grid(ex.limit, ex.F0, st), ConfigError);

    const SpectralProblem p({1.0, 2.0}, 1, 0.0);
    Vec c = Vec::Zero(2);
    c[1] = 1.0;
    Mat k = Mat::Zero(2, 2);
    k(1, 1) = 4.0;
    auto base = std::make_shared<SumMap>(std::vector<SumMap::Term>{
        {1.0, std::make_shared<ConstantMap>(c)}, {1.0, std::make_shared<LinearMap>(k)}});
    const CutoffNonlinearity F = make_F(base, p, 4.0, false);
    SolveSettings loose;
    loose.T_horizon = 20.0;
    loose.h = 0.01;
    loose.grid_nodes = 11;
    CHECK_THROWS_AS(solve_manifold(p, F, loose), GapViolation);
  }
}

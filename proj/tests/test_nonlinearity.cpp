#include <cmath>

#include "doctest.h"
#include "helpers.h"
#include "imlab/errors.h"
#include "imlab/sampling.h"

using namespace imlab;
using imlab::test::make_F;

namespace {

Vec radial_point(Sampler& rng, const Vec& w, double r) { return rng.point(w, r); }

}  // namespace

TEST_SUITE("nonlinearity") {
  TEST_CASE("radial cutoff profile") {
    const RadialCutoff z(4.0);
    CHECK(z.value(0.0) == 1.0);
    CHECK(z.value(2.0) == 1.0);
    CHECK(z.value(4.0) == 0.0);
    CHECK(z.value(7.0) == 0.0);
    double prev = 1.0;
    for (int k = 0; k <= 400; ++k) {
      const double r = 2.0 + 2.0 * k / 400.0;
      const double v = z.value(r);
      CHECK(v <= prev);
      CHECK(v >= 0.0);
      prev = v;
      const double h = 1e-6;
      if (r > 2.0 + h && r < 4.0 - h) {
        CHECK(z.derivative(r) == doctest::Approx((z.value(r + h) - z.value(r - h)) / (2 * h)).epsilon(1e-5));
        CHECK(std::abs(z.derivative(r)) <= z.sup_derivative());
        CHECK(std::abs(z.second_derivative(r)) <= z.sup_second_derivative());
      }
    }
    const RadialCutoff off(4.0, false);
    CHECK(off.value(100.0) == 1.0);
    CHECK(off.derivative(3.0) == 0.0);
  }

  TEST_CASE("support and plateau") {
    const SpectralProblem p = SpectralProblem::squares(8, 1, 0.25);
    Vec c = Vec::Zero(8);
    c[2] = 1.5;
    const CutoffNonlinearity F = make_F(std::make_shared<ConstantMap>(c), p);
    Sampler rng(1);
    for (int k = 0; k < 50; ++k) {
      const Vec outside = radial_point(rng, p.weights(), rng.uniform(4.0, 10.0));
      CHECK(F.eval(outside).isZero(0.0));
      CHECK(F.jacobian(outside).isZero(0.0));
      const Vec inside = radial_point(rng, p.weights(), rng.uniform(0.0, 2.0));
      CHECK(F.eval(inside) == c);
    }
    const auto sine = SineMap::default_model(8, 8, 0.02);
    const CutoffNonlinearity G = make_F(sine, p);
    CHECK(G.eval(Vec::Zero(8)) == sine->eval(Vec::Zero(8)));
  }

  TEST_CASE("jacobian of a linear base map") {
    const SpectralProblem p = SpectralProblem::squares(5, 1, 0.0);
    Mat b = Mat::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) b(i, j) = 0.01 * std::cos(i + 2.0 * j);
    const CutoffNonlinearity F = make_F(std::make_shared<LinearMap>(b), p);
    Sampler rng(2);
    for (int k = 0; k < 20; ++k) {
      const Vec u = radial_point(rng, p.weights(), rng.uniform(0.0, 2.0));
      CHECK((F.jacobian(u) - b).cwiseAbs().maxCoeff() <= 1e-16);
      CHECK(F.jacobian(radial_point(rng, p.weights(), 4.5)).isZero(0.0));
    }
  }

  TEST_CASE("jacobian matches central differences") {
    const SpectralProblem p = SpectralProblem::squares(12, 1, 0.3);
    const CutoffNonlinearity F = make_F(SineMap::default_model(12, 12, 0.05), p);
    Sampler rng(3);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Vec u = radial_point(rng, p.weights(), rng.uniform(0.0, 4.2));
      const Mat J = F.jacobian(u);
      Mat fd(12, 12);
      for (int j = 0; j < 12; ++j) {
        Vec e = Vec::Zero(12);
        e[j] = h;
        fd.col(j) = (F.eval(u + e) - F.eval(u - e)) / (2 * h);
      }
      const double scale = std::max(op_norm(J), 1e-3);
      worst = std::max(worst, op_norm(J - fd) / scale);
    }
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("certified constants") {
    const SpectralProblem p = SpectralProblem::squares(6, 1, 0.0);
    const CutoffNonlinearity zero = make_F(std::make_shared<ConstantMap>(Vec::Zero(6)), p);
    const CertifiedEstimates z = certify_constants(zero, 2000);
    CHECK(z.C_F == 0.0);
    CHECK(z.L_F == 0.0);
    CHECK(z.L == 0.0);

    Vec c = Vec::Zero(6);
    c[0] = 2.0;
    const CutoffNonlinearity two = make_F(std::make_shared<ConstantMap>(c), p);
    CHECK(certify_constants(two, 2000).C_F == doctest::Approx(2.0).epsilon(1e-15));

    const Experiment ex = imlab::test::default_experiment();
    const CertifiedEstimates est = certify_constants(ex.F0, 10000);
    CHECK(est.C_F <= ex.F0.constants().C_F);
    CHECK(est.L_F <= ex.F0.constants().L_F);
    CHECK(est.L <= ex.F0.constants().L);
    CHECK(est.L_F > 0.0);
  }

  TEST_CASE("certification rejects understated constants") {
    const Experiment ex = imlab::test::default_experiment();
    NonlinearityConstants low = ex.F0.constants();
    low.L_F *= 0.1;
    const CutoffNonlinearity bad(ex.F0.base(), ex.F0.weights(), ex.F0.cutoff(), low);
    CHECK_THROWS_AS(certify_constants(bad, 10000), CertificationError);
  }

  TEST_CASE("bound constants dominate sampled Lipschitz quotients") {
    const SpectralProblem p = SpectralProblem::squares(10, 1, 0.4);
    const CutoffNonlinearity F = make_F(SineMap::default_model(10, 10, 0.03), p);
    const NonlinearityConstants c = F.constants();
    Sampler rng(9);
    for (int k = 0; k < 500; ++k) {
      const Vec u = radial_point(rng, p.weights(), rng.uniform(0.0, 5.0));
      const Vec v = radial_point(rng, p.weights(), rng.uniform(0.0, 5.0));
      const double du = alpha_norm(p, u - v);
      CHECK(F.eval(u).norm() <= c.C_F);
      CHECK((F.eval(u) - F.eval(v)).norm() <= c.L_F * du * (1.0 + 1e-12));
      const Mat dj = (F.jacobian(u) - F.jacobian(v)) * p.weights().cwiseInverse().asDiagonal();
      CHECK(op_norm(dj) <= c.L * std::pow(du, c.theta_F) * (1.0 + 1e-12));
    }
  }

  TEST_CASE("conjugated map transports through the extension") {
    const SpectralProblem p0 = SpectralProblem::squares(6, 1, 0.0);
    std::vector<double> eig;
    for (int i = 1; i <= 6; ++i) eig.push_back(i * i * 1.1);
    const SpectralProblem pe(eig, 1, 0.0);
    const ExtensionPair pair = ExtensionPair::givens(p0, pe, 1, 2, 0.4);
    const auto inner = SineMap::default_model(6, 6, 0.05);
    const ConjugatedMap cm(inner, p0, pe, pair);
    Sampler rng(4);
    for (int k = 0; k < 20; ++k) {
      const Vec v = radial_point(rng, pe.weights(), 2.0);
      const Vec direct = pair.extend() * inner->eval(pair.project() * v);
      CHECK((cm.eval(v) - direct).norm() <= 1e-15);
      const Mat jd = pair.extend() * inner->jacobian(pair.project() * v) * pair.project();
      CHECK((cm.jacobian(v) - jd).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  TEST_CASE("rho for the additive family") {
    auto cfg = parse_config(R"({"nonlinearity": {"G": {"amplitude": 2.0}}, "family": {"eps_grid": [0.01]}})");
    const Experiment ex = build_experiment(cfg);
    const FamilyMember m0 = ex.family.instantiate(0.0);
    CHECK(rho_eps(ex.F0, m0.F, m0.pair, 4000) == 0.0);
    const FamilyMember m1 = ex.family.instantiate(0.01);
    CHECK(rho_eps(ex.F0, m1.F, m1.pair, 4000) == doctest::Approx(0.02).epsilon(0.05));
  }

  TEST_CASE("rho tracks eps times sup |G| on the default grid") {
    const Experiment ex = imlab::test::default_experiment();
    const double amp = ex.config.nonlinearity.G.amplitude;
    for (double eps : ex.family.eps_grid()) {
      const FamilyMember m = ex.family.instantiate(eps);
      const double r = rho_eps(ex.F0, m.F, m.pair, 4000);
      CHECK(r == doctest::Approx(eps * amp).epsilon(0.05));
    }
  }
}

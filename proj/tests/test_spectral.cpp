#include <cmath>

#include "doctest.h"
#include "imlab/errors.h"
#include "imlab/sampling.h"
#include "imlab/spectral.h"

using namespace imlab;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SpectralProblem scaled_squares(int n, int m, double alpha, double eps) {
  std::vector<double> eig;
  for (int i = 1; i <= n; ++i) eig.push_back(i * i * (1.0 + eps));
  return SpectralProblem(eig, m, alpha);
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("construction rejects invalid spectra") {
    CHECK_THROWS_AS(SpectralProblem({0.0, 1.0}, 1, 0.0), DomainError);
    CHECK_THROWS_AS(SpectralProblem({2.0, 1.0, 3.0}, 1, 0.0), DomainError);
    CHECK_THROWS_AS(SpectralProblem({1.0, 1.0, 4.0}, 1, 0.0), DomainError);
    CHECK_THROWS_AS(SpectralProblem({1.0, 4.0}, 2, 0.0), DomainError);
    CHECK_THROWS_AS(SpectralProblem({1.0, 4.0}, 1, 1.0), DomainError);
    CHECK_NOTHROW(SpectralProblem({1.0, 1.0, 4.0}, 2, 0.0));
  }

  TEST_CASE("alpha norm") {
    const SpectralProblem a({1.0, 4.0}, 1, 0.5);
    CHECK(alpha_norm(a, vec({3.0, 4.0})) == doctest::Approx(std::sqrt(73.0)).epsilon(1e-14));
    const SpectralProblem b({1.0, 4.0}, 1, 0.0);
    CHECK(alpha_norm(b, vec({3.0, 4.0})) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(alpha_norm(a, Vec::Zero(2)) == 0.0);
  }

  TEST_CASE("weighted slow coordinate norm") {
    const SpectralProblem a({1.0, 4.0, 9.0}, 2, 0.5);
    CHECK(weighted_coord_norm(a, vec({1.0, 1.0})) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    const SpectralProblem b({1.0, 4.0, 9.0}, 2, 0.0);
    CHECK(weighted_coord_norm(b, vec({1.0, 1.0})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(weighted_coord_norm(a, Vec::Zero(2)) == 0.0);
  }

  TEST_CASE("split and recombine") {
    const SpectralProblem p = SpectralProblem::squares(4, 2, 0.0);
    const SplitVector s = split(p, vec({1.0, 2.0, 3.0, 4.0}));
    CHECK(s.p == vec({1.0, 2.0}));
    CHECK(s.q == vec({3.0, 4.0}));
    const SplitVector z = split(p, Vec::Zero(4));
    CHECK(z.p.isZero(0.0));
    CHECK(z.q.isZero(0.0));
    Sampler rng(3);
    for (int k = 0; k < 100; ++k) {
      Vec v(4);
      for (int i = 0; i < 4; ++i) v[i] = rng.uniform(-5.0, 5.0);
      const SplitVector sv = split(p, v);
      CHECK(recombine(p, sv.p, sv.q) == v);
    }
    CHECK_THROWS_AS(split(p, Vec::Zero(3)), DimensionError);
  }

  TEST_CASE("fast semigroup") {
    const SpectralProblem p({1.0, 4.0}, 1, 0.0);
    CHECK(semigroup_q(p, 0.5, vec({1.0}))[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(semigroup_q(p, 0.0, vec({1.7}))[0] == 1.7);
    const SpectralProblem big = SpectralProblem::squares(12, 3, 0.3);
    Sampler rng(5);
    for (int k = 0; k < 100; ++k) {
      const double t = rng.uniform(0.0, 2.0);
      Vec q(9);
      for (int i = 0; i < 9; ++i) q[i] = rng.uniform(-1.0, 1.0);
      const double lhs = q_alpha_norm(big, semigroup_q(big, t, q));
      CHECK(lhs <= std::exp(-big.lambda_m1() * t) * q_alpha_norm(big, q) * (1.0 + 1e-14));
    }
  }

  TEST_CASE("slow semigroup") {
    const SpectralProblem p({1.0, 4.0}, 1, 0.0);
    CHECK(semigroup_p(p, -1.0, vec({1.0}))[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(semigroup_p(p, 0.0, vec({0.3}))[0] == 0.3);
    const SpectralProblem big = SpectralProblem::squares(12, 3, 0.3);
    Sampler rng(6);
    for (int k = 0; k < 100; ++k) {
      const double t = rng.uniform(-2.0, 0.0);
      Vec x(3);
      for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
      const double lhs = weighted_coord_norm(big, semigroup_p(big, t, x));
      CHECK(lhs <= std::exp(-big.lambda_m() * t) * weighted_coord_norm(big, x) * (1.0 + 1e-14));
    }
  }

  TEST_CASE("resolvent deficiency against a brute-force sup") {
    const int n = 32;
    for (double alpha : {0.0, 0.5}) {
      const SpectralProblem p0 = SpectralProblem::squares(n, 1, alpha);
      for (double eps : {0.1, 0.01}) {
        const SpectralProblem pe = scaled_squares(n, 1, alpha, eps);
        const ExtensionPair e = ExtensionPair::identity(p0, pe);
        double oracle = 0.0;
        for (int i = 1; i <= n; ++i) {
          const double le = i * i * (1.0 + eps);
          const double diff = std::abs(1.0 / le - 1.0 / (i * i));
          oracle = std::max(oracle, std::pow(le, alpha) * diff);
        }
        CHECK(resolvent_deficiency(p0, pe, e) == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
    const SpectralProblem p0 = SpectralProblem::squares(n, 1, 0.0);
    const SpectralProblem p1 = scaled_squares(n, 1, 0.0, 0.1);
    CHECK(resolvent_deficiency(p0, p1, ExtensionPair::identity(p0, p1)) ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(resolvent_deficiency(p0, p0, ExtensionPair::identity(p0, p0)) == 0.0);
    const SpectralProblem h0 = SpectralProblem::squares(n, 1, 0.5);
    const SpectralProblem h1 = scaled_squares(n, 1, 0.5, 0.1);
    CHECK(resolvent_deficiency(h0, h1, ExtensionPair::identity(h0, h1)) ==
          doctest::Approx(0.1 * std::pow(1.1, -0.5)).epsilon(1e-12));
  }

  TEST_CASE("norm equivalence delta") {
    const SpectralProblem a({1.0, 4.0, 9.0}, 2, 0.5);
    CHECK(norm_equivalence_delta(a, a) == 0.0);
    const SpectralProblem b({1.21, 4.0, 9.0}, 2, 0.5);
    CHECK(norm_equivalence_delta(a, b) == doctest::Approx(0.1).epsilon(1e-12));
    double prev = 0.0;
    for (double eps : {1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
      const double d = norm_equivalence_delta(SpectralProblem::squares(8, 2, 0.5), scaled_squares(8, 2, 0.5, eps));
      CHECK(d >= prev);
      prev = d;
    }
  }

  TEST_CASE("extension pairs") {
    const SpectralProblem p0 = SpectralProblem::squares(6, 2, 0.25);
    const SpectralProblem pe = scaled_squares(6, 2, 0.25, 0.05);
    for (const ExtensionPair& e :
         {ExtensionPair::identity(p0, pe), ExtensionPair::givens(p0, pe, 1, 2, 0.3)}) {
      const Mat me = e.project() * e.extend();
      CHECK((me - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(e.kappa() >= 1.0);
      const Vec w0 = p0.weights();
      const Vec we = pe.weights();
      CHECK(op_norm(e.extend()) <= e.kappa() * (1.0 + 1e-12));
      CHECK(op_norm(e.project()) <= e.kappa() * (1.0 + 1e-12));
      CHECK(op_norm(we.asDiagonal() * e.extend() * w0.cwiseInverse().asDiagonal()) <=
            e.kappa() * (1.0 + 1e-12));
      CHECK(op_norm(w0.asDiagonal() * e.project() * we.cwiseInverse().asDiagonal()) <=
            e.kappa() * (1.0 + 1e-12));
    }
    CHECK(ExtensionPair::identity(p0, pe).is_identity());
    CHECK_FALSE(ExtensionPair::givens(p0, pe, 1, 2, 0.3).is_identity());
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imlab/gap.h"
#include "imlab/lyapunov_perron.h"
#include "imlab/nonlinearity.h"
#include "imlab/spectral.h"

namespace imlab {

struct ExtensionRule {
  enum class Kind { Identity, Givens } kind = Kind::Identity;
  int i = 0;  // zero-based rotation plane
  int j = 1;
  double angle_per_eps = 0.0;
};

struct FamilyMember {
  double eps = 0.0;
  SpectralProblem problem;
  CutoffNonlinearity F;
  ExtensionPair pair;
};

/// One-parameter family lambda_i^eps = lambda_i^0 (1 + eps),
/// F_eps = cutoff(E b0(M u) + eps g(u)), E = M^T a rotation by angle_per_eps * eps.
class PerturbationFamily {
 public:
  PerturbationFamily(SpectralProblem limit, PerturbedNonlinearityPair nonlinearity,
                     ExtensionRule extension, std::vector<double> eps_grid);

  const SpectralProblem& limit() const { return limit_; }
  const CutoffNonlinearity& limit_F() const { return nonlinearity_.limit(); }
  const PerturbedNonlinearityPair& nonlinearity() const { return nonlinearity_; }
  const ExtensionRule& extension() const { return extension_; }
  const std::vector<double>& eps_grid() const { return eps_grid_; }

  SpectralProblem perturbed_problem(double eps) const;
  ExtensionPair pair(double eps) const;
  /// eps = 0 returns the base triple itself.
  FamilyMember instantiate(double eps) const;

 private:
  SpectralProblem limit_;
  PerturbedNonlinearityPair nonlinearity_;
  ExtensionRule extension_;
  std::vector<double> eps_grid_;
};

/// Uniform constants over the limit map and every grid member: the
/// componentwise max of their closed-form bounds.
NonlinearityConstants family_bound_constants(const SpectralProblem& limit,
                                             const PerturbedNonlinearityPair& nonlinearity,
                                             const ExtensionRule& extension,
                                             const std::vector<double>& eps_grid);

struct SolvedMember {
  ManifoldSolution manifold;
  DerivativeSolution derivative;
};

SolvedMember solve_member(const SpectralProblem& problem, const CutoffNonlinearity& F, double theta,
                          const SolveSettings& settings);

/// Limit-side evaluation lattice: grid nodes plus cell midpoints.
class EvalLattice {
 public:
  explicit EvalLattice(const GridSpec& grid);
  int m() const { return m_; }
  int per_axis() const { return n_; }
  int size() const { return m_ == 1 ? n_ : n_ * n_; }
  Vec point(int index) const;
  int flat(int i0, int i1) const { return m_ == 1 ? i0 : i0 * n_ + i1; }
  std::array<int, 2> multi(int index) const {
    return m_ == 1 ? std::array<int, 2>{index, 0} : std::array<int, 2>{index / n_, index % n_};
  }
  /// Pairs at dyadic lattice offsets along the axes (and diagonals for m = 2).
  std::vector<std::array<int, 2>> dyadic_pairs() const;

 private:
  int m_;
  int n_;
  std::array<double, 2> lo_{};
  std::array<double, 2> step_{};
};

/// Geometry shared by all distance measurements between a limit and a perturbed problem.
struct Comparison {
  const SpectralProblem& limit;
  const SpectralProblem& perturbed;
  const ExtensionPair& pair;
};

/// sup_u |(DF_eps(E u) E - E DF_0(u)) A_0^{-alpha}| over u = p + Phi_0(p) on
/// the manifold nodes, with `refine` - 1 interpolated points inserted per cell.
double beta_eps(const Comparison& c, const CutoffNonlinearity& F0, const CutoffNonlinearity& Feps,
                const GraphFunction& manifold0, int refine = 1);

/// sup_z |Phi_eps(z) - E Phi_0(z)|_{eps,alpha} over the lattice.
double sup_distance(const Comparison& c, const GraphFunction& phi_eps, const GraphFunction& phi0,
                    const EvalLattice& lattice);

/// sup_z |E DPsi_0(z) - DPsi_eps(P E z) P E| over the lattice.
double c1_distance(const Comparison& c, const DerivativeField& field_eps,
                   const DerivativeField& field0, const EvalLattice& lattice);

struct C1ThetaDistance {
  double d_sup = 0.0;
  double d_c1 = 0.0;
  double holder_diff = 0.0;     // theta-seminorm of the derivative difference
  double d_c1theta = 0.0;       // d_sup + d_c1 + holder_diff
  double certificate = 0.0;     // theta*-seminorm bound from the two fields separately
  double interp_bound = 0.0;    // certificate^{theta/theta*} (2 d_c1)^{1 - theta/theta*}
};

C1ThetaDistance c1theta_distance(const Comparison& c, const GraphFunction& phi_eps,
                                 const GraphFunction& phi0, const DerivativeField& field_eps,
                                 const DerivativeField& field0, double theta, double theta_star,
                                 const EvalLattice& lattice);

struct ThetaComparisonResult {
  std::vector<double> t;
  std::vector<double> lhs;
  std::vector<double> shape;     // [beta + (tau |log tau| + rho)^theta] e^{-a3 t}
  std::vector<double> c1_term;   // d_c1 / 2 * e^{-a4 t}
  double prefactor = 0.0;        // fitted C on the calibration samples
  double max_ratio = 0.0;        // max lhs / envelope over validation samples
  int violations = 0;
  int calibration = 0;
  int validation = 0;
};

struct ThetaComparisonInputs {
  double beta = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  double d_c1 = 0.0;
  double theta = 0.5;
  double kappa = 1.0;
  double L_F = 0.0;
  int xi_samples = 10;            // held-out validation points
  int t_per_xi = 5;               // random times per validation point
  int calibration_per_axis = 41;  // lattice across the support ball (m = 2 uses a quarter)
  double t_max = 3.0;
  std::uint64_t seed = 0;
};

/// Samples |P E Theta_0(z, t) - Theta_eps(P E z, t) P E| against the
/// two-term exponential envelope; the first prefactor is fitted on a lattice
/// covering the support ball and checked on held-out random samples.
ThetaComparisonResult theta_comparison(const Comparison& c, const CutoffNonlinearity& F0,
                                       const SolvedMember& s0, const CutoffNonlinearity& Feps,
                                       const SolvedMember& seps, const TimeGrid& tg,
                                       const ThetaComparisonInputs& in);

double log_bound(double tau, double rho);  // tau |log tau| + rho

struct DistanceRow {
  double eps = 0.0;
  double tau = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double d_sup = 0.0;
  double d_c1 = 0.0;
  double holder_diff = 0.0;
  double d_c1theta = 0.0;
  double bound_sup = 0.0;
  double bound_c1theta = 0.0;
  double certificate = 0.0;
  double interp_bound = 0.0;
  double interp_bound_m0 = 0.0;
  double delta = 0.0;
  bool interp_pass = false;
  bool pass_sup = false;
  bool pass_c1theta = false;
  bool calibration = false;
};

struct ConstantFit {
  double C = 0.0;       // max ratio over the calibration rows
  double C_lsq = 0.0;   // log-space least squares (geometric mean ratio)
  int calibration_rows = 0;
  bool all_pass = true;
};

/// Calibrates C on the rows flagged for calibration; rows pass when d <= C b.
ConstantFit fit_constant(const std::vector<double>& d, const std::vector<double>& b,
                         const std::vector<bool>& calibration, std::vector<bool>* pass = nullptr);

struct DistanceReport {
  std::vector<DistanceRow> rows;
  double theta = 0.0;
  double theta_star = 0.0;
  double M0 = 0.0;
  double kappa = 1.0;
  ConstantFit fit_sup;
  ConstantFit fit_c1theta;
  ConstantFit fit_sup_nolog;
  ConstantFit fit_c1theta_nolog;
  double limit_lipschitz = 0.0;
  double limit_holder = 0.0;
  int limit_iterations = 0;
  bool monotone_sup = true;
  bool all_pass() const;

  std::string to_csv() const;
  std::string to_json(const std::string& extra_metadata_json = "") const;
};

struct StudyOptions {
  std::size_t rho_samples = 4000;
  std::uint64_t seed = 0;
};

/// Full two-problem study over the family's eps grid.
DistanceReport rate_study(const PerturbationFamily& family, double theta, double theta_star,
                          const SolveSettings& settings, const StudyOptions& options = {});

}  // namespace imlab

#pragma once

#include <span>
#include <vector>

#include "imlab/linalg.h"

namespace imlab {

/// Truncated self-adjoint positive operator, stored through its spectrum.
///
/// Coordinates are taken in the orthonormal eigenbasis, so the operator is
/// diagonal. The first m modes span the slow (P) space, the remaining
/// N - m modes the fast (Q) space.
class SpectralProblem {
 public:
  SpectralProblem(std::vector<double> eigenvalues, int m, double alpha);

  /// Eigenvalues i^2 for i = 1..n.
  static SpectralProblem squares(int n, int m, double alpha);

  int size() const { return static_cast<int>(eigenvalues_.size()); }
  int m() const { return m_; }
  int q_size() const { return size() - m_; }
  double alpha() const { return alpha_; }

  std::span<const double> eigenvalues() const { return eigenvalues_; }
  /// Zero-based eigenvalue access.
  double lambda(int i) const { return eigenvalues_[static_cast<size_t>(i)]; }
  double lambda_m() const { return lambda(m_ - 1); }
  double lambda_m1() const { return lambda(m_); }

  /// lambda_i^alpha for all modes.
  const Vec& weights() const { return weights_; }
  Vec p_weights() const { return weights_.head(m_); }
  Vec q_weights() const { return weights_.tail(q_size()); }

  bool operator==(const SpectralProblem& other) const {
    return eigenvalues_ == other.eigenvalues_ && m_ == other.m_ && alpha_ == other.alpha_;
  }

 private:
  std::vector<double> eigenvalues_;
  int m_;
  double alpha_;
  Vec weights_;
};

double alpha_norm(const SpectralProblem& problem, const Vec& v);

/// |p|_{alpha} on the slow coordinates.
double weighted_coord_norm(const SpectralProblem& problem, const Vec& p);

/// alpha-norm of a fast-space vector (modes m+1..N).
double q_alpha_norm(const SpectralProblem& problem, const Vec& q);

struct SplitVector {
  Vec p;
  Vec q;
};

SplitVector split(const SpectralProblem& problem, const Vec& v);
Vec recombine(const SpectralProblem& problem, const Vec& p, const Vec& q);

/// e^{-A t} restricted to the fast space; t >= 0.
Vec semigroup_q(const SpectralProblem& problem, double t, const Vec& q);

/// e^{-A t} restricted to the slow space; any real t.
Vec semigroup_p(const SpectralProblem& problem, double t, const Vec& p);

/// Norm of a map from the slow space (alpha-weighted) to the fast space
/// (alpha-weighted), given as a (N-m) x m matrix.
double pq_operator_norm(const SpectralProblem& problem, const Mat& map);

/// Norm of an m x m map on the slow space in the alpha-weighted norm.
double pp_operator_norm(const SpectralProblem& problem, const Mat& map);

/// Extension E: X_0 -> X_eps and projection M: X_eps -> X_0 with M E = I.
class ExtensionPair {
 public:
  ExtensionPair(const SpectralProblem& limit, const SpectralProblem& perturbed, Mat extend,
                Mat project);

  static ExtensionPair identity(const SpectralProblem& limit, const SpectralProblem& perturbed);

  /// Rotation by angle in the (i, j) coordinate plane, zero-based modes.
  static ExtensionPair givens(const SpectralProblem& limit, const SpectralProblem& perturbed,
                              int i, int j, double angle);

  const Mat& extend() const { return extend_; }
  const Mat& project() const { return project_; }
  double kappa() const { return kappa_; }
  bool is_identity() const { return identity_; }

  Vec apply_extend(const Vec& u0) const;
  Vec apply_project(const Vec& u) const;

 private:
  Mat extend_;
  Mat project_;
  double kappa_;
  bool identity_;
};

/// Coordinates relative to the basis psi_i = P_m E phi_i^0 of the slow space.
class CoordIso {
 public:
  CoordIso(const SpectralProblem& problem, const ExtensionPair& pair);

  /// j^{-1}: coordinates -> slow-space eigen coefficients.
  Vec from_coords(const Vec& z) const { return basis_ * z; }
  /// j: slow-space eigen coefficients -> coordinates.
  Vec to_coords(const Vec& p) const;
  const Mat& basis() const { return basis_; }

 private:
  Mat basis_;
  Eigen::PartialPivLU<Mat> lu_;
};

/// Exact norm of A_eps^{-1} E - E A_0^{-1} from X_0 into X_eps^alpha.
double resolvent_deficiency(const SpectralProblem& limit, const SpectralProblem& perturbed,
                            const ExtensionPair& pair);

/// Smallest delta with (1-delta)|p|_{0,a} <= |p|_{eps,a} <= (1+delta)|p|_{0,a}.
double norm_equivalence_delta(const SpectralProblem& limit, const SpectralProblem& perturbed);

}  // namespace imlab

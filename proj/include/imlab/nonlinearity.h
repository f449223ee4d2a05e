#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "imlab/linalg.h"
#include "imlab/spectral.h"

namespace imlab {

/// Global bounds of a smooth map b on coefficient space, measured from the
/// alpha-weighted input norm into the plain output norm.
struct MapBounds {
  double sup = 0.0;        // sup |b(u)|
  double lipschitz = 0.0;  // sup |Db(u)|
  double second = 0.0;     // sup |D^2 b(u)|, i.e. Lipschitz constant of Db
};

/// Smooth map before the radial cutoff is applied.
class BaseMap {
 public:
  virtual ~BaseMap() = default;
  virtual int dim() const = 0;
  virtual Vec eval(const Vec& u) const = 0;
  /// Db(u) * v for a block of directions v (columns).
  virtual Mat jacobian_apply(const Vec& u, const Mat& v) const = 0;
  /// weights are lambda_i^alpha of the input space; radius bounds the inputs
  /// that matter (only used by maps that are not globally bounded).
  virtual MapBounds bounds(const Vec& weights, double radius) const = 0;

  Mat jacobian(const Vec& u) const;
};

/// b_k(u) = a_k sin(w_k . u + c_k).
class SineMap final : public BaseMap {
 public:
  SineMap(Vec amplitude, Mat frequencies, Vec phase);

  /// Deterministic default model acting on the first `active` modes.
  static std::shared_ptr<SineMap> default_model(int n, int active, double amplitude);
  /// g(u) = amplitude * sin(omega u_mode + phase) * direction.
  static std::shared_ptr<SineMap> rank_one(int n, double amplitude, double omega, double phase,
                                           int mode, const Vec& direction);

  int dim() const override { return static_cast<int>(amplitude_.size()); }
  Vec eval(const Vec& u) const override;
  Mat jacobian_apply(const Vec& u, const Mat& v) const override;
  MapBounds bounds(const Vec& weights, double radius) const override;

  const Vec& amplitude() const { return amplitude_; }

 private:
  Vec amplitude_;
  Mat frequencies_;
  Vec phase_;
};

class ConstantMap final : public BaseMap {
 public:
  explicit ConstantMap(Vec value) : value_(std::move(value)) {}
  int dim() const override { return static_cast<int>(value_.size()); }
  Vec eval(const Vec&) const override { return value_; }
  Mat jacobian_apply(const Vec&, const Mat& v) const override {
    return Mat::Zero(value_.size(), v.cols());
  }
  MapBounds bounds(const Vec&, double) const override { return {value_.norm(), 0.0, 0.0}; }

 private:
  Vec value_;
};

class LinearMap final : public BaseMap {
 public:
  explicit LinearMap(Mat matrix) : matrix_(std::move(matrix)) {}
  int dim() const override { return static_cast<int>(matrix_.rows()); }
  Vec eval(const Vec& u) const override { return matrix_ * u; }
  Mat jacobian_apply(const Vec&, const Mat& v) const override { return matrix_ * v; }
  MapBounds bounds(const Vec& weights, double radius) const override;

 private:
  Mat matrix_;
};

/// sum_k c_k b_k(u).
class SumMap final : public BaseMap {
 public:
  struct Term {
    double weight;
    std::shared_ptr<const BaseMap> map;
  };
  explicit SumMap(std::vector<Term> terms);
  int dim() const override { return terms_.front().map->dim(); }
  Vec eval(const Vec& u) const override;
  Mat jacobian_apply(const Vec& u, const Mat& v) const override;
  MapBounds bounds(const Vec& weights, double radius) const override;

 private:
  std::vector<Term> terms_;
};

/// v -> E b(M v), transporting a limit-space map to the perturbed space.
class ConjugatedMap final : public BaseMap {
 public:
  ConjugatedMap(std::shared_ptr<const BaseMap> inner, const SpectralProblem& limit,
                const SpectralProblem& perturbed, const ExtensionPair& pair);
  int dim() const override { return static_cast<int>(extend_.rows()); }
  Vec eval(const Vec& u) const override;
  Mat jacobian_apply(const Vec& u, const Mat& v) const override;
  MapBounds bounds(const Vec& weights, double radius) const override;

 private:
  std::shared_ptr<const BaseMap> inner_;
  Mat extend_;
  Mat project_;
  Vec limit_weights_;
  double extend_plain_;
  double project_alpha_;
};

/// Smooth radial bump: 1 on [0, R/2], 0 on [R, inf), exp-based in between.
class RadialCutoff {
 public:
  /// Disabled cutoffs are identically 1 (analytic fixtures only).
  explicit RadialCutoff(double radius, bool enabled = true);

  double radius() const { return radius_; }
  bool enabled() const { return enabled_; }
  double value(double r) const;
  double derivative(double r) const;
  double second_derivative(double r) const;
  double sup_derivative() const { return sup_d1_; }
  double sup_second_derivative() const { return sup_d2_; }

 private:
  double radius_;
  bool enabled_;
  double sup_d1_ = 0.0;
  double sup_d2_ = 0.0;
};

/// Constants of (a) boundedness, (b) Lipschitz, and the C^{1,theta_F} bound.
struct NonlinearityConstants {
  double C_F = 0.0;
  double L_F = 0.0;
  double theta_F = 1.0;
  double L = 0.0;
};

/// F(u) = zeta(|u|_alpha) b(u).
class CutoffNonlinearity {
 public:
  CutoffNonlinearity(std::shared_ptr<const BaseMap> base, Vec weights, RadialCutoff cutoff,
                     NonlinearityConstants constants);

  int dim() const { return static_cast<int>(weights_.size()); }
  Vec eval(const Vec& u) const;
  /// DF(u) * v for a block of directions.
  Mat jacobian_apply(const Vec& u, const Mat& v) const;
  Mat jacobian(const Vec& u) const;

  const NonlinearityConstants& constants() const { return constants_; }
  /// Closed-form upper bounds derived from the base map and the cutoff.
  NonlinearityConstants bound_constants() const;

  const RadialCutoff& cutoff() const { return cutoff_; }
  double radius() const { return cutoff_.radius(); }
  bool is_fixture() const { return !cutoff_.enabled(); }
  bool is_zero() const { return zero_; }
  const Vec& weights() const { return weights_; }
  const std::shared_ptr<const BaseMap>& base() const { return base_; }

 private:
  double radius_of(const Vec& u) const { return u.cwiseProduct(weights_).norm(); }

  std::shared_ptr<const BaseMap> base_;
  Vec weights_;
  RadialCutoff cutoff_;
  NonlinearityConstants constants_;
  bool zero_;
};

struct CertifiedEstimates {
  double C_F = 0.0;
  double L_F = 0.0;
  double L = 0.0;
  std::size_t pairs = 0;
};

/// Sampled lower bounds on C_F, L_F, L. Throws CertificationError naming the
/// witness when a sample exceeds the configured constant.
CertifiedEstimates certify_constants(const CutoffNonlinearity& f, std::size_t sample_count,
                                     std::uint64_t seed = 0);

/// F_eps = cutoff(E F0base M + eps G) on the perturbed space.
class PerturbedNonlinearityPair {
 public:
  PerturbedNonlinearityPair(CutoffNonlinearity limit, std::shared_ptr<const BaseMap> direction,
                            NonlinearityConstants family_constants);

  const CutoffNonlinearity& limit() const { return limit_; }
  const std::shared_ptr<const BaseMap>& direction() const { return direction_; }
  const NonlinearityConstants& family_constants() const { return family_constants_; }

  /// eps = 0 with the limit space returns the limit map itself.
  CutoffNonlinearity at(double eps, const SpectralProblem& limit_problem,
                        const SpectralProblem& perturbed, const ExtensionPair& pair) const;

 private:
  CutoffNonlinearity limit_;
  std::shared_ptr<const BaseMap> direction_;
  NonlinearityConstants family_constants_;
};

/// Sampled sup_u0 |F_eps(E u0) - E F0(u0)|.
double rho_eps(const CutoffNonlinearity& limit, const CutoffNonlinearity& perturbed,
               const ExtensionPair& pair, std::size_t samples, std::uint64_t seed = 0);

}  // namespace imlab

#include "imlab/spectral.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "imlab/errors.h"

namespace imlab {

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.cols() == 1) return a.col(0).norm();
  if (a.rows() == 1) return a.row(0).norm();
  const Mat gram = a.cols() <= a.rows() ? Mat(a.transpose() * a) : Mat(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

namespace {

void require_size(const Vec& v, int n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace

SpectralProblem::SpectralProblem(std::vector<double> eigenvalues, int m, double alpha)
    : eigenvalues_(std::move(eigenvalues)), m_(m), alpha_(alpha) {
  const int n = size();
  if (n < 2) throw DomainError("spectral problem needs at least two modes");
  if (m < 1 || m >= n) throw DomainError("cut index m must satisfy 1 <= m < N");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
  if (!(eigenvalues_.front() > 0.0)) throw DomainError("eigenvalues must be strictly positive");
  for (int i = 1; i < n; ++i) {
    if (eigenvalues_[i] < eigenvalues_[i - 1]) throw DomainError("eigenvalues must be nondecreasing");
  }
  if (!(lambda_m() < lambda_m1())) throw DomainError("cut requires lambda_m < lambda_{m+1}");
  weights_.resize(n);
  for (int i = 0; i < n; ++i) weights_[i] = std::pow(eigenvalues_[i], alpha_);
}

SpectralProblem SpectralProblem::squares(int n, int m, double alpha) {
  std::vector<double> eig(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) eig[i] = static_cast<double>(i + 1) * (i + 1);
  return SpectralProblem(std::move(eig), m, alpha);
}

double alpha_norm(const SpectralProblem& problem, const Vec& v) {
  require_size(v, problem.size(), "alpha_norm");
  return v.cwiseProduct(problem.weights()).norm();
}

double weighted_coord_norm(const SpectralProblem& problem, const Vec& p) {
  require_size(p, problem.m(), "weighted_coord_norm");
  return p.cwiseProduct(problem.weights().head(problem.m())).norm();
}

double q_alpha_norm(const SpectralProblem& problem, const Vec& q) {
  require_size(q, problem.q_size(), "q_alpha_norm");
  return q.cwiseProduct(problem.weights().tail(problem.q_size())).norm();
}

SplitVector split(const SpectralProblem& problem, const Vec& v) {
  require_size(v, problem.size(), "split");
  return {v.head(problem.m()), v.tail(problem.q_size())};
}

Vec recombine(const SpectralProblem& problem, const Vec& p, const Vec& q) {
  require_size(p, problem.m(), "recombine");
  require_size(q, problem.q_size(), "recombine");
  Vec v(problem.size());
  v << p, q;
  return v;
}

Vec semigroup_q(const SpectralProblem& problem, double t, const Vec& q) {
  if (t < 0.0) throw DomainError("semigroup_q requires t >= 0");
  require_size(q, problem.q_size(), "semigroup_q");
  Vec out(q.size());
  for (int i = 0; i < q.size(); ++i) out[i] = std::exp(-problem.lambda(problem.m() + i) * t) * q[i];
  return out;
}

Vec semigroup_p(const SpectralProblem& problem, double t, const Vec& p) {
  require_size(p, problem.m(), "semigroup_p");
  Vec out(p.size());
  for (int i = 0; i < p.size(); ++i) out[i] = std::exp(-problem.lambda(i) * t) * p[i];
  return out;
}

double pq_operator_norm(const SpectralProblem& problem, const Mat& map) {
  if (map.rows() != problem.q_size() || map.cols() != problem.m()) {
    throw DimensionError("pq_operator_norm: map must be (N-m) x m");
  }
  const Mat weighted = problem.q_weights().asDiagonal() * map *
                       problem.p_weights().cwiseInverse().asDiagonal();
  return op_norm(weighted);
}

double pp_operator_norm(const SpectralProblem& problem, const Mat& map) {
  if (map.rows() != problem.m() || map.cols() != problem.m()) {
    throw DimensionError("pp_operator_norm: map must be m x m");
  }
  const Vec w = problem.p_weights();
  return op_norm(w.asDiagonal() * map * w.cwiseInverse().asDiagonal());
}

ExtensionPair::ExtensionPair(const SpectralProblem& limit, const SpectralProblem& perturbed,
                             Mat extend, Mat project)
    : extend_(std::move(extend)), project_(std::move(project)), identity_(false) {
  const int n0 = limit.size();
  const int n = perturbed.size();
  if (extend_.rows() != n || extend_.cols() != n0) throw DimensionError("E must be N x N0");
  if (project_.rows() != n0 || project_.cols() != n) throw DimensionError("M must be N0 x N");
  const Mat me = project_ * extend_;
  if (!me.isIdentity(1e-12)) throw DomainError("extension pair must satisfy M E = I");
  identity_ = (n == n0) && extend_.isIdentity(0.0) && project_.isIdentity(0.0);

  const Vec& w0 = limit.weights();
  const Vec& we = perturbed.weights();
  const double e_plain = op_norm(extend_);
  const double m_plain = op_norm(project_);
  const double e_alpha = op_norm(we.asDiagonal() * extend_ * w0.cwiseInverse().asDiagonal());
  const double m_alpha = op_norm(w0.asDiagonal() * project_ * we.cwiseInverse().asDiagonal());
  kappa_ = std::max({1.0, e_plain, m_plain, e_alpha, m_alpha});
}

ExtensionPair ExtensionPair::identity(const SpectralProblem& limit,
                                      const SpectralProblem& perturbed) {
  if (limit.size() != perturbed.size()) throw DimensionError("identity pair needs equal N");
  const Mat eye = Mat::Identity(limit.size(), limit.size());
  return ExtensionPair(limit, perturbed, eye, eye);
}

ExtensionPair ExtensionPair::givens(const SpectralProblem& limit,
                                    const SpectralProblem& perturbed, int i, int j,
                                    double angle) {
  const int n = limit.size();
  if (perturbed.size() != n) throw DimensionError("givens pair needs equal N");
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw DomainError("invalid rotation plane");
  Mat rot = Mat::Identity(n, n);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  rot(i, i) = c;
  rot(j, j) = c;
  rot(i, j) = -s;
  rot(j, i) = s;
  Mat inv = rot.transpose();
  return ExtensionPair(limit, perturbed, rot, inv);
}

Vec ExtensionPair::apply_extend(const Vec& u0) const {
  if (u0.size() != extend_.cols()) throw DimensionError("apply_extend: size mismatch");
  if (identity_) return u0;
  return extend_ * u0;
}

Vec ExtensionPair::apply_project(const Vec& u) const {
  if (u.size() != project_.cols()) throw DimensionError("apply_project: size mismatch");
  if (identity_) return u;
  return project_ * u;
}

CoordIso::CoordIso(const SpectralProblem& problem, const ExtensionPair& pair)
    : basis_(pair.extend().topLeftCorner(problem.m(), problem.m())) {
  lu_.compute(basis_);
  if (std::abs(lu_.determinant()) < 1e-12) {
    throw DomainError("P_m E does not map the slow eigenbasis onto a basis");
  }
}

Vec CoordIso::to_coords(const Vec& p) const {
  if (p.size() != basis_.rows()) throw DimensionError("to_coords: size mismatch");
  return lu_.solve(p);
}

double resolvent_deficiency(const SpectralProblem& limit, const SpectralProblem& perturbed,
                            const ExtensionPair& pair) {
  if (pair.extend().rows() != perturbed.size() || pair.extend().cols() != limit.size()) {
    throw DimensionError("resolvent_deficiency: pair does not match problems");
  }
  const Mat& e = pair.extend();
  Mat diff(e.rows(), e.cols());
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    for (Eigen::Index c = 0; c < e.cols(); ++c) {
      diff(r, c) = e(r, c) / perturbed.lambda(static_cast<int>(r)) -
                   e(r, c) / limit.lambda(static_cast<int>(c));
    }
  }
  return op_norm(perturbed.weights().asDiagonal() * diff);
}

double norm_equivalence_delta(const SpectralProblem& limit, const SpectralProblem& perturbed) {
  if (limit.m() != perturbed.m() || limit.alpha() != perturbed.alpha()) {
    throw DomainError("norm_equivalence_delta requires equal m and alpha");
  }
  double delta = 0.0;
  for (int i = 0; i < limit.m(); ++i) {
    const double ratio = std::pow(perturbed.lambda(i) / limit.lambda(i), limit.alpha());
    delta = std::max(delta, std::abs(ratio - 1.0));
  }
  return delta;
}

}  // namespace imlab

#include "imlab/nonlinearity.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "imlab/errors.h"
#include "imlab/parallel.h"
#include "imlab/sampling.h"

namespace imlab {

Mat BaseMap::jacobian(const Vec& u) const {
  return jacobian_apply(u, Mat::Identity(u.size(), u.size()));
}

SineMap::SineMap(Vec amplitude, Mat frequencies, Vec phase)
    : amplitude_(std::move(amplitude)), frequencies_(std::move(frequencies)), phase_(std::move(phase)) {
  const auto n = amplitude_.size();
  if (frequencies_.rows() != n || phase_.size() != n) {
    throw DimensionError("sine map: amplitude, frequency rows and phase must agree");
  }
}

std::shared_ptr<SineMap> SineMap::default_model(int n, int active, double amplitude) {
  Vec a = Vec::Zero(n);
  Mat w(n, n);
  Vec c(n);
  for (int k = 0; k < n; ++k) {
    const double kk = k + 1;
    if (k < active) a[k] = amplitude / (kk * kk);
    for (int j = 0; j < n; ++j) {
      const double jj = j + 1;
      w(k, j) = std::cos(kk + 2.0 * jj) / (jj * jj);
    }
    c[k] = 0.5 * kk;
  }
  return std::make_shared<SineMap>(std::move(a), std::move(w), std::move(c));
}

std::shared_ptr<SineMap> SineMap::rank_one(int n, double amplitude, double omega, double phase,
                                           int mode, const Vec& direction) {
  if (direction.size() != n) throw DimensionError("rank_one: direction length");
  if (mode < 0 || mode >= n) throw DomainError("rank_one: mode out of range");
  Mat w = Mat::Zero(n, n);
  w.col(mode).setConstant(omega);
  return std::make_shared<SineMap>(amplitude * direction, std::move(w), Vec::Constant(n, phase));
}

Vec SineMap::eval(const Vec& u) const {
  const Vec arg = frequencies_ * u + phase_;
  return amplitude_.cwiseProduct(arg.array().sin().matrix());
}

Mat SineMap::jacobian_apply(const Vec& u, const Mat& v) const {
  const Vec arg = frequencies_ * u + phase_;
  const Vec scale = amplitude_.cwiseProduct(arg.array().cos().matrix());
  return scale.asDiagonal() * (frequencies_ * v);
}

MapBounds SineMap::bounds(const Vec& weights, double) const {
  const Mat scaled = frequencies_ * weights.cwiseInverse().asDiagonal();
  double second = 0.0;
  for (Eigen::Index k = 0; k < scaled.rows(); ++k) {
    const double r2 = scaled.row(k).squaredNorm();
    second += amplitude_[k] * amplitude_[k] * r2 * r2;
  }
  return {amplitude_.norm(), op_norm(amplitude_.asDiagonal() * scaled), std::sqrt(second)};
}

MapBounds LinearMap::bounds(const Vec& weights, double radius) const {
  const double lip = op_norm(matrix_ * weights.cwiseInverse().asDiagonal());
  return {lip * radius, lip, 0.0};
}

SumMap::SumMap(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("sum map needs at least one term");
  for (const auto& t : terms_) {
    if (t.map->dim() != terms_.front().map->dim()) throw DimensionError("sum map: dimension mismatch");
  }
}

Vec SumMap::eval(const Vec& u) const {
  Vec out = Vec::Zero(dim());
  for (const auto& t : terms_) {
    if (t.weight != 0.0) out += t.weight * t.map->eval(u);
  }
  return out;
}

Mat SumMap::jacobian_apply(const Vec& u, const Mat& v) const {
  Mat out = Mat::Zero(dim(), v.cols());
  for (const auto& t : terms_) {
    if (t.weight != 0.0) out += t.weight * t.map->jacobian_apply(u, v);
  }
  return out;
}

MapBounds SumMap::bounds(const Vec& weights, double radius) const {
  MapBounds out;
  for (const auto& t : terms_) {
    const MapBounds b = t.map->bounds(weights, radius);
    const double w = std::abs(t.weight);
    out.sup += w * b.sup;
    out.lipschitz += w * b.lipschitz;
    out.second += w * b.second;
  }
  return out;
}

ConjugatedMap::ConjugatedMap(std::shared_ptr<const BaseMap> inner, const SpectralProblem& limit,
                             const SpectralProblem& perturbed, const ExtensionPair& pair)
    : inner_(std::move(inner)),
      extend_(pair.extend()),
      project_(pair.project()),
      limit_weights_(limit.weights()) {
  if (inner_->dim() != limit.size()) throw DimensionError("conjugated map: inner dimension");
  extend_plain_ = op_norm(extend_);
  project_alpha_ = op_norm(limit.weights().asDiagonal() * project_ *
                           perturbed.weights().cwiseInverse().asDiagonal());
}

Vec ConjugatedMap::eval(const Vec& u) const { return extend_ * inner_->eval(project_ * u); }

Mat ConjugatedMap::jacobian_apply(const Vec& u, const Mat& v) const {
  return extend_ * inner_->jacobian_apply(project_ * u, project_ * v);
}

MapBounds ConjugatedMap::bounds(const Vec&, double radius) const {
  const MapBounds b = inner_->bounds(limit_weights_, radius * project_alpha_);
  return {extend_plain_ * b.sup, extend_plain_ * b.lipschitz * project_alpha_,
          extend_plain_ * b.second * project_alpha_ * project_alpha_};
}

namespace {

double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_d1(double x) { return x > 0.0 ? bump(x) / (x * x) : 0.0; }
double bump_d2(double x) {
  return x > 0.0 ? bump(x) * (1.0 - 2.0 * x) / (x * x * x * x) : 0.0;
}

}  // namespace

RadialCutoff::RadialCutoff(double radius, bool enabled) : radius_(radius), enabled_(enabled) {
  if (!(radius > 0.0)) throw DomainError("cutoff radius must be positive");
  if (!enabled_) return;
  constexpr int kSamples = 20000;
  double d1 = 0.0;
  double d2 = 0.0;
  for (int i = 1; i < kSamples; ++i) {
    const double r = 0.5 * radius_ * (1.0 + static_cast<double>(i) / kSamples);
    d1 = std::max(d1, std::abs(derivative(r)));
    d2 = std::max(d2, std::abs(second_derivative(r)));
  }
  sup_d1_ = 1.01 * d1;
  sup_d2_ = 1.01 * d2;
}

double RadialCutoff::value(double r) const {
  if (!enabled_ || r <= 0.5 * radius_) return 1.0;
  if (r >= radius_) return 0.0;
  const double a = bump(radius_ - r);
  const double b = bump(r - 0.5 * radius_);
  return a / (a + b);
}

double RadialCutoff::derivative(double r) const {
  if (!enabled_ || r <= 0.5 * radius_ || r >= radius_) return 0.0;
  const double a = bump(radius_ - r);
  const double b = bump(r - 0.5 * radius_);
  const double da = -bump_d1(radius_ - r);
  const double db = bump_d1(r - 0.5 * radius_);
  const double s = a + b;
  return (da * b - a * db) / (s * s);
}

double RadialCutoff::second_derivative(double r) const {
  if (!enabled_ || r <= 0.5 * radius_ || r >= radius_) return 0.0;
  const double a = bump(radius_ - r);
  const double b = bump(r - 0.5 * radius_);
  const double da = -bump_d1(radius_ - r);
  const double db = bump_d1(r - 0.5 * radius_);
  const double dda = bump_d2(radius_ - r);
  const double ddb = bump_d2(r - 0.5 * radius_);
  const double s = a + b;
  const double ds = da + db;
  const double d1 = (da * b - a * db) / (s * s);
  return (dda * b - a * ddb) / (s * s) - 2.0 * d1 * ds / s;
}

CutoffNonlinearity::CutoffNonlinearity(std::shared_ptr<const BaseMap> base, Vec weights,
                                       RadialCutoff cutoff, NonlinearityConstants constants)
    : base_(std::move(base)), weights_(std::move(weights)), cutoff_(cutoff), constants_(constants) {
  if (base_->dim() != weights_.size()) throw DimensionError("nonlinearity: base map dimension");
  if (!(constants_.theta_F > 0.0 && constants_.theta_F <= 1.0)) {
    throw DomainError("theta_F must lie in (0, 1]");
  }
  const MapBounds b = base_->bounds(weights_, cutoff_.radius());
  zero_ = b.sup == 0.0 && b.lipschitz == 0.0;
}

Vec CutoffNonlinearity::eval(const Vec& u) const {
  if (u.size() != dim()) throw DimensionError("eval_F: dimension mismatch");
  if (zero_) return Vec::Zero(dim());
  const double z = cutoff_.value(radius_of(u));
  if (z == 0.0) return Vec::Zero(dim());
  return z * base_->eval(u);
}

Mat CutoffNonlinearity::jacobian_apply(const Vec& u, const Mat& v) const {
  if (u.size() != dim() || v.rows() != dim()) throw DimensionError("eval_DF: dimension mismatch");
  if (zero_) return Mat::Zero(dim(), v.cols());
  const double r = radius_of(u);
  const double z = cutoff_.value(r);
  const double dz = cutoff_.derivative(r);
  if (z == 0.0 && dz == 0.0) return Mat::Zero(dim(), v.cols());
  Mat out = z * base_->jacobian_apply(u, v);
  if (dz != 0.0) {
    const Vec grad = u.cwiseProduct(weights_).cwiseProduct(weights_) / r;
    out += (dz * base_->eval(u)) * (grad.transpose() * v);
  }
  return out;
}

Mat CutoffNonlinearity::jacobian(const Vec& u) const {
  return jacobian_apply(u, Mat::Identity(dim(), dim()));
}

NonlinearityConstants CutoffNonlinearity::bound_constants() const {
  const double radius = cutoff_.radius();
  const MapBounds b = base_->bounds(weights_, radius);
  NonlinearityConstants c;
  c.theta_F = 1.0;
  if (!cutoff_.enabled()) {
    c.C_F = b.sup;
    c.L_F = b.lipschitz;
    c.L = b.second;
    return c;
  }
  const double d1 = cutoff_.sup_derivative();
  const double d2 = cutoff_.sup_second_derivative();
  c.C_F = b.sup;
  c.L_F = b.lipschitz + b.sup * d1;
  c.L = b.second + 2.0 * d1 * b.lipschitz + b.sup * (d2 + d1 * 2.0 / radius);
  return c;
}

namespace {

std::string describe(const Vec& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

double alpha_op_norm(const Mat& a, const Vec& weights) {
  return op_norm(a * weights.cwiseInverse().asDiagonal());
}

}  // namespace

CertifiedEstimates certify_constants(const CutoffNonlinearity& f, std::size_t sample_count,
                                     std::uint64_t seed) {
  if (sample_count < 2) throw DomainError("certify_constants needs at least two samples");
  const Vec& w = f.weights();
  const double radius = f.radius();
  const double theta_f = f.constants().theta_F;

  Sampler rng(seed);
  std::vector<Vec> us(sample_count);
  std::vector<Vec> vs(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) {
    us[i] = rng.point(w, rng.uniform(0.0, 1.2 * radius));
    const double scale = std::pow(10.0, rng.uniform(-4.0, std::log10(radius)));
    vs[i] = us[i] + rng.point(w, scale);
  }

  struct Sample {
    double sup, lip, hol;
  };
  std::vector<Sample> out(sample_count);
  parallel_for(static_cast<std::ptrdiff_t>(sample_count), Exec::Parallel, [&](std::ptrdiff_t i) {
    const Vec& u = us[i];
    const Vec& v = vs[i];
    const double dist = (u - v).cwiseProduct(w).norm();
    const Vec fu = f.eval(u);
    const Vec fv = f.eval(v);
    const double hol =
        alpha_op_norm(f.jacobian(u) - f.jacobian(v), w) / std::pow(dist, theta_f);
    out[i] = {std::max(fu.norm(), fv.norm()), (fu - fv).norm() / dist, hol};
  });

  const NonlinearityConstants& cfg = f.constants();
  CertifiedEstimates est;
  est.pairs = sample_count;
  for (std::size_t i = 0; i < sample_count; ++i) {
    est.C_F = std::max(est.C_F, out[i].sup);
    est.L_F = std::max(est.L_F, out[i].lip);
    est.L = std::max(est.L, out[i].hol);
    const char* name = nullptr;
    double sampled = 0.0;
    double configured = 0.0;
    if (out[i].sup > cfg.C_F) {
      name = "C_F", sampled = out[i].sup, configured = cfg.C_F;
    } else if (out[i].lip > cfg.L_F) {
      name = "L_F", sampled = out[i].lip, configured = cfg.L_F;
    } else if (out[i].hol > cfg.L) {
      name = "L", sampled = out[i].hol, configured = cfg.L;
    }
    if (name) {
      char head[160];
      std::snprintf(head, sizeof head, "%s certificate violated: sampled %.17g > configured %.17g",
                    name, sampled, configured);
      throw CertificationError(std::string(head) + " at pair u = " + describe(us[i]) +
                               ", v = " + describe(vs[i]));
    }
  }
  return est;
}

PerturbedNonlinearityPair::PerturbedNonlinearityPair(CutoffNonlinearity limit,
                                                     std::shared_ptr<const BaseMap> direction,
                                                     NonlinearityConstants family_constants)
    : limit_(std::move(limit)), direction_(std::move(direction)), family_constants_(family_constants) {}

CutoffNonlinearity PerturbedNonlinearityPair::at(double eps, const SpectralProblem& limit_problem,
                                                 const SpectralProblem& perturbed,
                                                 const ExtensionPair& pair) const {
  if (eps == 0.0 && pair.is_identity() && perturbed == limit_problem) return limit_;
  std::shared_ptr<const BaseMap> transported = limit_.base();
  if (!pair.is_identity()) {
    transported = std::make_shared<ConjugatedMap>(limit_.base(), limit_problem, perturbed, pair);
  }
  auto base = std::make_shared<SumMap>(
      std::vector<SumMap::Term>{{1.0, transported}, {eps, direction_}});
  return CutoffNonlinearity(base, perturbed.weights(), limit_.cutoff(), family_constants_);
}

double rho_eps(const CutoffNonlinearity& limit, const CutoffNonlinearity& perturbed,
               const ExtensionPair& pair, std::size_t samples, std::uint64_t seed) {
  const Vec& w0 = limit.weights();
  const double radius = limit.radius();
  const int n0 = limit.dim();

  std::vector<Vec> points;
  constexpr int kAxisPoints = 65;
  const int axes = std::min(n0, 8);
  for (int k = 0; k < axes; ++k) {
    for (int j = 0; j < kAxisPoints; ++j) {
      Vec u = Vec::Zero(n0);
      u[k] = (-1.2 + 2.4 * j / (kAxisPoints - 1)) * radius / w0[k];
      points.push_back(std::move(u));
    }
  }
  Sampler rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    points.push_back(rng.point(w0, rng.uniform(0.0, 1.2 * radius)));
  }
  for (int i = 0; i < 16; ++i) points.push_back(rng.point(w0, radius * rng.uniform(1.0, 3.0)));

  std::vector<double> dist(points.size());
  parallel_for(static_cast<std::ptrdiff_t>(points.size()), Exec::Parallel, [&](std::ptrdiff_t i) {
    const Vec& u0 = points[i];
    dist[i] = (perturbed.eval(pair.apply_extend(u0)) - pair.apply_extend(limit.eval(u0))).norm();
  });
  double best = 0.0;
  for (double d : dist) best = std::max(best, d);
  return best;
}

}  // namespace imlab

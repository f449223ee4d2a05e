#include "imlab/grid.h"

#include <algorithm>
#include <cmath>

#include "imlab/errors.h"

namespace imlab {

GridSpec::GridSpec(const SpectralProblem& problem, int nodes_per_axis, double box_factor,
                   double radius)
    : m_(problem.m()),
      g_(nodes_per_axis),
      radius_(radius),
      box_factor_(box_factor),
      p_weights_(problem.p_weights()),
      q_weights_(problem.q_weights()) {
  if (m_ < 1 || m_ > 2) throw DomainError("grids support m in {1, 2}");
  if (g_ < 3) throw DomainError("grid needs at least 3 nodes per axis");
  if (!(box_factor > 0.0) || !(radius > 0.0)) throw DomainError("grid box must be positive");
  count_ = m_ == 1 ? g_ : g_ * g_;
  for (int i = 0; i < m_; ++i) half_[i] = box_factor * radius / p_weights_[i];
}

std::array<int, 2> GridSpec::multi_index(int node) const {
  if (m_ == 1) return {node, 0};
  return {node / g_, node % g_};
}

Vec GridSpec::node(int index) const {
  const auto mi = multi_index(index);
  Vec p(m_);
  for (int i = 0; i < m_; ++i) p[i] = -half_[i] + spacing(i) * mi[i];
  return p;
}

double GridSpec::op_norm_pq(const Mat& a) const {
  if (m_ == 1) return a.col(0).cwiseProduct(q_weights_).norm() / p_weights_[0];
  return op_norm(q_weights_.asDiagonal() * a * p_weights_.cwiseInverse().asDiagonal());
}

GridSpec::Stencil GridSpec::locate(const Vec& p) const {
  Stencil st;
  std::array<int, 2> lo{};
  std::array<double, 2> frac{};
  for (int i = 0; i < m_; ++i) {
    const double x = (p[i] + half_[i]) / spacing(i);
    if (!(x >= 0.0 && x <= g_ - 1)) return st;
    int c = static_cast<int>(std::floor(x));
    c = std::min(c, g_ - 2);
    lo[i] = c;
    frac[i] = x - c;
  }
  if (m_ == 1) {
    st.count = 2;
    st.nodes = {lo[0], lo[0] + 1, 0, 0};
    st.weights = {1.0 - frac[0], frac[0], 0.0, 0.0};
    return st;
  }
  st.count = 4;
  st.nodes = {flat_index(lo[0], lo[1]), flat_index(lo[0], lo[1] + 1), flat_index(lo[0] + 1, lo[1]),
              flat_index(lo[0] + 1, lo[1] + 1)};
  st.weights = {(1.0 - frac[0]) * (1.0 - frac[1]), (1.0 - frac[0]) * frac[1],
                frac[0] * (1.0 - frac[1]), frac[0] * frac[1]};
  return st;
}

GridSpec GridSpec::with_nodes(int nodes_per_axis) const {
  GridSpec out = *this;
  if (nodes_per_axis < 3) throw DomainError("grid needs at least 3 nodes per axis");
  out.g_ = nodes_per_axis;
  out.count_ = m_ == 1 ? out.g_ : out.g_ * out.g_;
  return out;
}

GraphFunction::GraphFunction(GridSpec spec)
    : spec_(std::move(spec)), values_(Mat::Zero(spec_.q_size(), spec_.node_count())) {}

Vec GraphFunction::eval(const Vec& p) const {
  if (p.size() != spec_.m()) throw DimensionError("graph eval: expected m coordinates");
  const auto st = spec_.locate(p);
  Vec out = Vec::Zero(spec_.q_size());
  for (int k = 0; k < st.count; ++k) {
    if (st.weights[k] != 0.0) out += st.weights[k] * values_.col(st.nodes[k]);
  }
  return out;
}

double GraphFunction::sup_diff(const GraphFunction& other) const {
  if (!(spec_ == other.spec_)) throw DimensionError("graph functions live on different grids");
  const Mat d = spec_.q_weights().asDiagonal() * (values_ - other.values_);
  return d.colwise().norm().maxCoeff();
}

double GraphFunction::sup_norm() const {
  return (spec_.q_weights().asDiagonal() * values_).colwise().norm().maxCoeff();
}

DerivativeField::DerivativeField(GridSpec spec)
    : spec_(std::move(spec)),
      values_(Mat::Zero(spec_.q_size(), spec_.m() * spec_.node_count())) {}

Mat DerivativeField::eval(const Vec& p) const {
  if (p.size() != spec_.m()) throw DimensionError("field eval: expected m coordinates");
  const auto st = spec_.locate(p);
  Mat out = Mat::Zero(spec_.q_size(), spec_.m());
  for (int k = 0; k < st.count; ++k) {
    if (st.weights[k] != 0.0) out += st.weights[k] * node_value(st.nodes[k]);
  }
  return out;
}

double DerivativeField::sup_diff(const DerivativeField& other) const {
  if (!(spec_ == other.spec_)) throw DimensionError("derivative fields live on different grids");
  double best = 0.0;
  for (int j = 0; j < spec_.node_count(); ++j) {
    best = std::max(best, spec_.op_norm_pq(node_value(j) - other.node_value(j)));
  }
  return best;
}

double DerivativeField::sup_norm() const {
  double best = 0.0;
  for (int j = 0; j < spec_.node_count(); ++j) best = std::max(best, spec_.op_norm_pq(node_value(j)));
  return best;
}

}  // namespace imlab

#pragma once

#include <array>
#include <vector>

#include "imlab/linalg.h"
#include "imlab/spectral.h"

namespace imlab {

/// Uniform tensor grid over the slow coordinates, m in {1, 2}.
///
/// Axis i spans [-b_i, b_i] with b_i = box_factor * R / lambda_i^alpha, so the
/// box has weighted half-width box_factor * R along every axis. Nodes are
/// numbered row-major (last axis fastest).
class GridSpec {
 public:
  GridSpec(const SpectralProblem& problem, int nodes_per_axis, double box_factor, double radius);

  int m() const { return m_; }
  int q_size() const { return static_cast<int>(q_weights_.size()); }
  int nodes_per_axis() const { return g_; }
  int node_count() const { return count_; }
  double radius() const { return radius_; }
  double box_factor() const { return box_factor_; }
  double half_width(int axis) const { return half_[axis]; }
  double spacing(int axis) const { return 2.0 * half_[axis] / (g_ - 1); }

  const Vec& p_weights() const { return p_weights_; }
  const Vec& q_weights() const { return q_weights_; }

  std::array<int, 2> multi_index(int node) const;
  int flat_index(int i0, int i1 = 0) const { return m_ == 1 ? i0 : i0 * g_ + i1; }
  Vec node(int index) const;

  double p_norm(const Vec& p) const { return p.cwiseProduct(p_weights_).norm(); }
  double q_norm(const Vec& q) const { return q.cwiseProduct(q_weights_).norm(); }
  /// Weighted operator norm of an (N-m) x m map.
  double op_norm_pq(const Mat& a) const;

  struct Stencil {
    int count = 0;
    std::array<int, 4> nodes{};
    std::array<double, 4> weights{};
  };
  /// Multilinear interpolation stencil; count = 0 outside the box.
  Stencil locate(const Vec& p) const;

  /// Grid of the same box with the given node count.
  GridSpec with_nodes(int nodes_per_axis) const;

  bool operator==(const GridSpec& o) const {
    return m_ == o.m_ && g_ == o.g_ && half_ == o.half_ && q_weights_ == o.q_weights_;
  }

 private:
  int m_;
  int g_;
  int count_;
  double radius_;
  double box_factor_;
  std::array<double, 2> half_{};
  Vec p_weights_;
  Vec q_weights_;
};

/// Graph p -> Phi(p) of the fast coordinates over the slow ones.
class GraphFunction {
 public:
  explicit GraphFunction(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  /// Column j holds the fast-coefficient vector at node j.
  const Mat& values() const { return values_; }
  Mat& values() { return values_; }
  Vec node_value(int j) const { return values_.col(j); }

  /// Multilinear interpolation; 0 outside the box.
  Vec eval(const Vec& p) const;

  /// max over nodes of the weighted norm of Phi - other.
  double sup_diff(const GraphFunction& other) const;
  double sup_norm() const;

 private:
  GridSpec spec_;
  Mat values_;
};

/// Field p -> Upsilon(p) of linear maps from the slow to the fast coordinates.
class DerivativeField {
 public:
  explicit DerivativeField(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  /// Node j occupies columns [j*m, (j+1)*m).
  const Mat& values() const { return values_; }
  Mat& values() { return values_; }
  Mat node_value(int j) const { return values_.middleCols(j * spec_.m(), spec_.m()); }
  void set_node(int j, const Mat& a) { values_.middleCols(j * spec_.m(), spec_.m()) = a; }

  Mat eval(const Vec& p) const;

  double sup_diff(const DerivativeField& other) const;
  /// max over nodes of the weighted operator norm.
  double sup_norm() const;

 private:
  GridSpec spec_;
  Mat values_;
};

}  // namespace imlab

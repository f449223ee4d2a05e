#pragma once

#include <cstdint>
#include <vector>

#include "imlab/grid.h"
#include "imlab/linalg.h"
#include "imlab/nonlinearity.h"
#include "imlab/parallel.h"
#include "imlab/spectral.h"

namespace imlab {

struct SolveSettings {
  double T_horizon = 0.0;  // <= 0 selects the automatic horizon
  double h = 0.02;
  double tol_fp = 1e-13;
  int max_iter = 200;
  int grid_nodes = 201;
  double box_factor = 1.5;
  Exec exec = Exec::Parallel;
};

/// Horizon and step actually used: K = ceil(T / h) steps of length T / K.
struct TimeGrid {
  double T = 0.0;
  double h = 0.0;
  int steps = 0;
};

/// Resolves the horizon and validates T >= alpha / lambda_{m+1}, h <= 0.1 / Lambda0
/// and the overflow guard Lambda0 * T <= 690.
TimeGrid resolve_time_grid(const SpectralProblem& problem, const CutoffNonlinearity& F,
                           const SolveSettings& settings);

GridSpec make_grid(const SpectralProblem& problem, const CutoffNonlinearity& F,
                   const SolveSettings& settings);

/// Point p + Phi(p) of the full coefficient space.
Vec graph_point(const SpectralProblem& problem, const GraphFunction& phi, const Vec& p);

struct Trajectory {
  std::vector<double> s;  // s_k = -k h, descending from 0
  std::vector<Vec> p;
  bool left_support = false;  // stopped early once |p|_alpha >= R
};

/// Backward RK4 march of p' = -A_P p + P F(p + Phi(p)) from p(0) = xi.
/// With truncate set, the march stops at the first node outside the support
/// ball, where the flow is linear and F vanishes from then on.
Trajectory integrate_p_backward(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const GraphFunction& phi, const Vec& xi, const TimeGrid& tg,
                                bool truncate = true);

struct ThetaTrajectory {
  std::vector<double> s;
  std::vector<Vec> p;
  std::vector<Mat> Theta;
  bool left_support = false;
};

/// Joint march of p and Theta' = -A_P Theta + P DF(u)[I; Upsilon(p)] Theta, Theta(0) = I.
ThetaTrajectory integrate_Theta(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const GraphFunction& phi, const DerivativeField& upsilon,
                                const Vec& xi, const TimeGrid& tg, bool truncate = true);

/// (T Phi)(xi) at a single point.
Vec transform_at(const SpectralProblem& problem, const CutoffNonlinearity& F,
                 const GraphFunction& phi, const Vec& xi, const TimeGrid& tg);

/// D(Phi, Upsilon)(xi) at a single point.
Mat derivative_at(const SpectralProblem& problem, const CutoffNonlinearity& F,
                  const GraphFunction& phi, const DerivativeField& upsilon, const Vec& xi,
                  const TimeGrid& tg);

GraphFunction apply_T(const SpectralProblem& problem, const CutoffNonlinearity& F,
                      const GraphFunction& phi, const TimeGrid& tg, Exec exec = Exec::Parallel);

DerivativeField apply_D(const SpectralProblem& problem, const CutoffNonlinearity& F,
                        const GraphFunction& phi, const DerivativeField& upsilon,
                        const TimeGrid& tg, Exec exec = Exec::Parallel);

struct IterationLog {
  int iterations = 0;          // k of the first iterate with |T x_k - x_k| < tol
  std::vector<double> diffs;   // |x_{k+1} - x_k|, k = 0, 1, ...
  std::vector<double> ratios;  // diffs[k] / diffs[k-1]
  double max_ratio() const;
};

struct ManifoldSolution {
  GraphFunction phi;
  IterationLog log;
  TimeGrid time;
};

/// Iterates Phi_{k+1} = T Phi_k from Phi_0 = 0.
ManifoldSolution solve_manifold(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const SolveSettings& settings);

struct DerivativeSolution {
  DerivativeField field;
  IterationLog log;
};

/// Iterates Upsilon_{k+1} = D(Psi, Upsilon_k) from Upsilon_0 = 0.
DerivativeSolution solve_derivative(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                    const ManifoldSolution& psi, double theta,
                                    const SolveSettings& settings);

/// Max weighted difference quotient over adjacent node pairs and random pairs.
double lipschitz_certificate(const GraphFunction& phi, std::size_t random_pairs = 1000,
                             std::uint64_t seed = 0);

/// Max |Upsilon(p) - Upsilon(p')| / |p - p'|^theta over dyadic node offsets.
double holder_certificate(const DerivativeField& upsilon, double theta);

}  // namespace imlab

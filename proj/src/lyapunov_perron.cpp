#include "imlab/lyapunov_perron.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "imlab/errors.h"
#include "imlab/sampling.h"

namespace imlab {

namespace {

constexpr double kOverflowExponent = 690.0;
constexpr double kStateGuard = 1e150;

double lambda0_of(const SpectralProblem& problem, const CutoffNonlinearity& F) {
  return 2.0 * F.constants().L_F * std::pow(problem.lambda_m(), problem.alpha()) + problem.lambda_m();
}

/// Per-mode exponential trapezoid weights on one step of length h.
struct Quadrature {
  Vec decay;  // e^{-lambda h}
  Vec a;      // weight of the sample at the upper end of the step
  Vec b;      // weight of the sample at the lower end

  Quadrature(const SpectralProblem& problem, double h) {
    const int nq = problem.q_size();
    decay.resize(nq);
    a.resize(nq);
    b.resize(nq);
    for (int i = 0; i < nq; ++i) {
      const double x = problem.lambda(problem.m() + i) * h;
      double phi;
      double bw;
      if (x < 1e-3) {
        phi = 1.0 - x / 2.0 + x * x / 6.0;
        bw = 0.5 - x / 3.0 + x * x / 8.0;
      } else {
        const double ex = std::exp(-x);
        phi = (1.0 - ex) / x;
        bw = (1.0 - ex - x * ex) / (x * x);
      }
      decay[i] = std::exp(-x);
      a[i] = h * (phi - bw);
      b[i] = h * bw;
    }
  }
};

void guard_state(const Vec& p, double s) {
  const double n = p.norm();
  if (!std::isfinite(n) || n > kStateGuard) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "backward trajectory overflow at s = %.6g (|p| = %.3g); horizon too long for the gap",
                  s, n);
    throw NumericalError(msg);
  }
}

bool outside_support(const CutoffNonlinearity& F, const SpectralProblem& problem, const Vec& p) {
  return F.cutoff().enabled() && p.cwiseProduct(problem.p_weights()).norm() >= F.radius();
}

/// Shared backward march. Calls visit(k, p_k, Fu_k) at every node reached.
template <class Visit>
bool march_p(const SpectralProblem& problem, const CutoffNonlinearity& F, const GraphFunction& phi,
             const Vec& xi, const TimeGrid& tg, bool truncate, Visit&& visit) {
  const int m = problem.m();
  const Vec lam = Eigen::Map<const Vec>(problem.eigenvalues().data(), m);
  auto eval_u = [&](const Vec& p) {
    Vec u(problem.size());
    u << p, phi.eval(p);
    return F.eval(u);
  };
  auto rhs = [&](const Vec& p, const Vec& fu) -> Vec { return lam.cwiseProduct(p) - fu.head(m); };

  const double h = tg.h;
  Vec p = xi;
  Vec fu = eval_u(p);
  for (int k = 0;; ++k) {
    visit(k, p, fu);
    if (k == tg.steps) return false;
    if (truncate && outside_support(F, problem, p)) return true;
    const Vec k1 = rhs(p, fu);
    const Vec p2 = p + 0.5 * h * k1;
    const Vec k2 = rhs(p2, eval_u(p2));
    const Vec p3 = p + 0.5 * h * k2;
    const Vec k3 = rhs(p3, eval_u(p3));
    const Vec p4 = p + h * k3;
    const Vec k4 = rhs(p4, eval_u(p4));
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    guard_state(p, -(k + 1) * h);
    fu = eval_u(p);
  }
}

/// Joint march of (p, Theta). visit(k, p_k, Theta_k, J_k) with J = DF(u)[I; Upsilon] Theta.
template <class Visit>
bool march_theta(const SpectralProblem& problem, const CutoffNonlinearity& F,
                 const GraphFunction& phi, const DerivativeField& upsilon, const Vec& xi,
                 const TimeGrid& tg, bool truncate, Visit&& visit) {
  const int m = problem.m();
  const int n = problem.size();
  const Vec lam = Eigen::Map<const Vec>(problem.eigenvalues().data(), m);

  struct State {
    Vec p;
    Mat th;
  };
  struct Deriv {
    Vec dp;
    Mat dth;
    Vec fu;
    Mat j;
  };
  auto eval = [&](const State& st) {
    Deriv d;
    Vec u(n);
    u << st.p, phi.eval(st.p);
    Mat v(n, m);
    v << st.th, upsilon.eval(st.p) * st.th;
    d.fu = F.eval(u);
    d.j = F.jacobian_apply(u, v);
    d.dp = lam.cwiseProduct(st.p) - d.fu.head(m);
    d.dth = lam.asDiagonal() * st.th - d.j.topRows(m);
    return d;
  };
  auto step = [](const State& st, const Deriv& d, double c) {
    return State{st.p + c * d.dp, st.th + c * d.dth};
  };

  const double h = tg.h;
  State st{xi, Mat::Identity(m, m)};
  Deriv d = eval(st);
  for (int k = 0;; ++k) {
    visit(k, st.p, st.th, d.j);
    if (k == tg.steps) return false;
    if (truncate && outside_support(F, problem, st.p)) return true;
    const Deriv d2 = eval(step(st, d, 0.5 * h));
    const Deriv d3 = eval(step(st, d2, 0.5 * h));
    const Deriv d4 = eval(step(st, d3, h));
    st.p += (h / 6.0) * (d.dp + 2.0 * d2.dp + 2.0 * d3.dp + d4.dp);
    st.th += (h / 6.0) * (d.dth + 2.0 * d2.dth + 2.0 * d3.dth + d4.dth);
    guard_state(st.p, -(k + 1) * h);
    if (!st.th.allFinite()) throw NumericalError("linearized trajectory is not finite");
    d = eval(st);
  }
}

bool forced_zero(const SpectralProblem& problem, const CutoffNonlinearity& F, const Vec& xi) {
  return F.is_zero() || outside_support(F, problem, xi);
}

}  // namespace

TimeGrid resolve_time_grid(const SpectralProblem& problem, const CutoffNonlinearity& F,
                           const SolveSettings& settings) {
  const double lm1 = problem.lambda_m1();
  const double alpha = problem.alpha();
  if (!(settings.h > 0.0)) throw ConfigError("step size h must be positive");
  if (!(settings.tol_fp > 0.0)) throw ConfigError("tol_fp must be positive");
  double T = settings.T_horizon;
  if (T <= 0.0) {
    const double cf = std::max(F.constants().C_F, 1e-300);
    T = std::max(alpha / lm1, std::log(cf * std::pow(lm1, alpha) / (lm1 * settings.tol_fp)) / lm1);
    T = std::max(T, settings.h);
  }
  if (T < alpha / lm1) throw ConfigError("T_horizon must be at least alpha / lambda_{m+1}");
  const double l0 = lambda0_of(problem, F);
  if (settings.h > 0.1 / l0 * (1.0 + 1e-12)) throw ConfigError("step size must satisfy h <= 0.1 / Lambda0");
  if (l0 * T > kOverflowExponent) {
    char msg[200];
    std::snprintf(msg, sizeof msg,
                  "overflow guard: Lambda0 * T = %.6g exceeds %.0f; backward growth e^{Lambda0 T} is "
                  "not representable",
                  l0 * T, kOverflowExponent);
    throw NumericalError(msg);
  }
  TimeGrid tg;
  tg.steps = std::max(1, static_cast<int>(std::ceil(T / settings.h - 1e-12)));
  tg.T = T;
  tg.h = T / tg.steps;
  return tg;
}

GridSpec make_grid(const SpectralProblem& problem, const CutoffNonlinearity& F,
                   const SolveSettings& settings) {
  return GridSpec(problem, settings.grid_nodes, settings.box_factor, F.radius());
}

Vec graph_point(const SpectralProblem& problem, const GraphFunction& phi, const Vec& p) {
  return recombine(problem, p, phi.eval(p));
}

Trajectory integrate_p_backward(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const GraphFunction& phi, const Vec& xi, const TimeGrid& tg,
                                bool truncate) {
  if (xi.size() != problem.m()) throw DimensionError("integrate_p_backward: xi must have m entries");
  if (!xi.allFinite()) throw DomainError("integrate_p_backward: xi must be finite");
  Trajectory tr;
  tr.left_support = march_p(problem, F, phi, xi, tg, truncate, [&](int k, const Vec& p, const Vec&) {
    tr.s.push_back(-k * tg.h);
    tr.p.push_back(p);
  });
  return tr;
}

ThetaTrajectory integrate_Theta(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const GraphFunction& phi, const DerivativeField& upsilon,
                                const Vec& xi, const TimeGrid& tg, bool truncate) {
  if (xi.size() != problem.m()) throw DimensionError("integrate_Theta: xi must have m entries");
  ThetaTrajectory tr;
  tr.left_support = march_theta(problem, F, phi, upsilon, xi, tg, truncate,
                                [&](int k, const Vec& p, const Mat& th, const Mat&) {
                                  tr.s.push_back(-k * tg.h);
                                  tr.p.push_back(p);
                                  tr.Theta.push_back(th);
                                });
  return tr;
}

Vec transform_at(const SpectralProblem& problem, const CutoffNonlinearity& F,
                 const GraphFunction& phi, const Vec& xi, const TimeGrid& tg) {
  const int nq = problem.q_size();
  Vec acc = Vec::Zero(nq);
  if (forced_zero(problem, F, xi)) return acc;
  const Quadrature quad(problem, tg.h);
  Vec kernel = Vec::Ones(nq);
  Vec prev;
  march_p(problem, F, phi, xi, tg, true, [&](int k, const Vec&, const Vec& fu) {
    const auto fq = fu.tail(nq);
    if (k > 0) {
      acc += kernel.cwiseProduct(quad.a.cwiseProduct(prev) + quad.b.cwiseProduct(fq));
      kernel = kernel.cwiseProduct(quad.decay);
    }
    prev = fq;
  });
  return acc;
}

Mat derivative_at(const SpectralProblem& problem, const CutoffNonlinearity& F,
                  const GraphFunction& phi, const DerivativeField& upsilon, const Vec& xi,
                  const TimeGrid& tg) {
  const int m = problem.m();
  const int nq = problem.q_size();
  Mat acc = Mat::Zero(nq, m);
  if (forced_zero(problem, F, xi)) return acc;
  const Quadrature quad(problem, tg.h);
  Vec kernel = Vec::Ones(nq);
  Mat prev;
  march_theta(problem, F, phi, upsilon, xi, tg, true,
              [&](int k, const Vec&, const Mat&, const Mat& j) {
                const auto jq = j.bottomRows(nq);
                if (k > 0) {
                  acc += kernel.asDiagonal() * (quad.a.asDiagonal() * prev + quad.b.asDiagonal() * jq);
                  kernel = kernel.cwiseProduct(quad.decay);
                }
                prev = jq;
              });
  return acc;
}

GraphFunction apply_T(const SpectralProblem& problem, const CutoffNonlinearity& F,
                      const GraphFunction& phi, const TimeGrid& tg, Exec exec) {
  GraphFunction out(phi.spec());
  const GridSpec& spec = phi.spec();
  if (F.is_zero()) return out;
  parallel_for(spec.node_count(), exec, [&](std::ptrdiff_t j) {
    out.values().col(j) = transform_at(problem, F, phi, spec.node(static_cast<int>(j)), tg);
  });
  return out;
}

DerivativeField apply_D(const SpectralProblem& problem, const CutoffNonlinearity& F,
                        const GraphFunction& phi, const DerivativeField& upsilon,
                        const TimeGrid& tg, Exec exec) {
  DerivativeField out(phi.spec());
  const GridSpec& spec = phi.spec();
  if (F.is_zero()) return out;
  parallel_for(spec.node_count(), exec, [&](std::ptrdiff_t j) {
    const int node = static_cast<int>(j);
    out.set_node(node, derivative_at(problem, F, phi, upsilon, spec.node(node), tg));
  });
  return out;
}

double IterationLog::max_ratio() const {
  double r = 0.0;
  for (double x : ratios) r = std::max(r, x);
  return r;
}

namespace {

/// Generic fixed-point loop over x_{k+1} = step(x_k), stopping once |x_{k+1} - x_k| < tol
/// for some k >= 1.
template <class X, class Step, class Diff>
X iterate(X x, const SolveSettings& settings, IterationLog& log, Step&& step, Diff&& diff,
          const char* what) {
  int streak = 0;
  for (int k = 0; k < settings.max_iter; ++k) {
    X next = step(x);
    const double d = diff(next, x);
    if (!std::isfinite(d)) throw NumericalError(std::string(what) + ": iterate is not finite");
    log.diffs.push_back(d);
    if (k > 0) {
      const double prev = log.diffs[k - 1];
      const double r = prev > 0.0 ? d / prev : 0.0;
      log.ratios.push_back(r);
      streak = r >= 1.0 ? streak + 1 : 0;
      if (streak >= 3) {
        throw GapViolation(std::string(what) + ": iteration stopped contracting (ratio >= 1 three times)");
      }
    }
    x = std::move(next);
    if (k >= 1 && d < settings.tol_fp) {
      log.iterations = k;
      return x;
    }
  }
  char msg[160];
  std::snprintf(msg, sizeof msg, "%s: no convergence within %d iterations (last update %.3g)", what,
                settings.max_iter, log.diffs.empty() ? 0.0 : log.diffs.back());
  throw ConvergenceError(msg);
}

}  // namespace

ManifoldSolution solve_manifold(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                const SolveSettings& settings) {
  const TimeGrid tg = resolve_time_grid(problem, F, settings);
  IterationLog log;
  GraphFunction start(make_grid(problem, F, settings));
  GraphFunction phi = iterate(
      std::move(start), settings, log,
      [&](const GraphFunction& x) { return apply_T(problem, F, x, tg, settings.exec); },
      [](const GraphFunction& a, const GraphFunction& b) { return a.sup_diff(b); }, "solve_manifold");
  return {std::move(phi), std::move(log), tg};
}

DerivativeSolution solve_derivative(const SpectralProblem& problem, const CutoffNonlinearity& F,
                                    const ManifoldSolution& psi, double theta,
                                    const SolveSettings& settings) {
  const NonlinearityConstants& c = F.constants();
  if (!(theta > 0.0) || theta > c.theta_F) {
    throw AdmissibilityError("solve_derivative: theta must lie in (0, theta_F]");
  }
  const double am = std::pow(problem.lambda_m(), problem.alpha());
  const double am1 = std::pow(problem.lambda_m1(), problem.alpha());
  const double t0 = (problem.lambda_m1() - problem.lambda_m() - 4.0 * c.L_F * am - 2.0 * c.L_F * am1) /
                    (2.0 * c.L_F * am + problem.lambda_m());
  if (!(theta < t0)) throw AdmissibilityError("solve_derivative: theta must be below theta0");
  IterationLog log;
  DerivativeField start(psi.phi.spec());
  DerivativeField field = iterate(
      std::move(start), settings, log,
      [&](const DerivativeField& x) {
        return apply_D(problem, F, psi.phi, x, psi.time, settings.exec);
      },
      [](const DerivativeField& a, const DerivativeField& b) { return a.sup_diff(b); },
      "solve_derivative");
  return {std::move(field), std::move(log)};
}

double lipschitz_certificate(const GraphFunction& phi, std::size_t random_pairs, std::uint64_t seed) {
  const GridSpec& spec = phi.spec();
  const int n = spec.node_count();
  const int g = spec.nodes_per_axis();
  auto quotient = [&](int a, int b) {
    const double dp = spec.p_norm(spec.node(a) - spec.node(b));
    return spec.q_norm(phi.values().col(a) - phi.values().col(b)) / dp;
  };
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto mi = spec.multi_index(j);
    if (mi[0] + 1 < g) best = std::max(best, quotient(j, spec.flat_index(mi[0] + 1, mi[1])));
    if (spec.m() == 2) {
      if (mi[1] + 1 < g) best = std::max(best, quotient(j, spec.flat_index(mi[0], mi[1] + 1)));
      if (mi[0] + 1 < g && mi[1] + 1 < g) {
        best = std::max(best, quotient(j, spec.flat_index(mi[0] + 1, mi[1] + 1)));
      }
    }
  }
  Sampler rng(seed);
  for (std::size_t i = 0; i < random_pairs; ++i) {
    const int a = rng.index(n);
    int b = rng.index(n);
    if (b == a) b = (a + 1) % n;
    best = std::max(best, quotient(a, b));
  }
  return best;
}

double holder_certificate(const DerivativeField& upsilon, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("holder_certificate: theta must lie in (0, 1]");
  const GridSpec& spec = upsilon.spec();
  const int n = spec.node_count();
  const int g = spec.nodes_per_axis();
  std::vector<std::array<int, 2>> offsets;
  for (int step = 1; step < g; step *= 2) {
    offsets.push_back({step, 0});
    if (spec.m() == 2) {
      offsets.push_back({0, step});
      offsets.push_back({step, step});
      offsets.push_back({step, -step});
    }
  }
  std::vector<double> per_node(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, Exec::Parallel, [&](std::ptrdiff_t jj) {
    const int j = static_cast<int>(jj);
    const auto mi = spec.multi_index(j);
    const Mat a = upsilon.node_value(j);
    const Vec pa = spec.node(j);
    double best = 0.0;
    for (const auto& off : offsets) {
      const int i0 = mi[0] + off[0];
      const int i1 = mi[1] + off[1];
      if (i0 >= g || i1 < 0 || (spec.m() == 2 && i1 >= g)) continue;
      const int k = spec.flat_index(i0, i1);
      const double dp = spec.p_norm(pa - spec.node(k));
      best = std::max(best, spec.op_norm_pq(a - upsilon.node_value(k)) / std::pow(dp, theta));
    }
    per_node[j] = best;
  });
  return *std::max_element(per_node.begin(), per_node.end());
}

}  // namespace imlab

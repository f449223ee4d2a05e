// Serial reference vs OpenMP sweeps of the graph transform and the derivative map.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>

#include "imlab/config.h"
#include "imlab/lyapunov_perron.h"

using namespace imlab;

namespace {

template <class Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::stoi(argv[1]) : 3;
  const Experiment ex = build_experiment(parse_config("{}"));
  SolveSettings st = ex.config.solver;
  const ManifoldSolution psi = solve_manifold(ex.limit, ex.F0, st);
  const DerivativeSolution ups = solve_derivative(ex.limit, ex.F0, psi, ex.theta(), st);
  const TimeGrid& tg = psi.time;

  GraphFunction ts(psi.phi.spec()), tp(psi.phi.spec());
  DerivativeField ds(ups.field.spec()), dp(ups.field.spec());
  const double t_ts = best_of(reps, [&] { ts = apply_T(ex.limit, ex.F0, psi.phi, tg, Exec::Serial); });
  const double t_tp = best_of(reps, [&] { tp = apply_T(ex.limit, ex.F0, psi.phi, tg, Exec::Parallel); });
  const double t_ds =
      best_of(reps, [&] { ds = apply_D(ex.limit, ex.F0, psi.phi, ups.field, tg, Exec::Serial); });
  const double t_dp =
      best_of(reps, [&] { dp = apply_D(ex.limit, ex.F0, psi.phi, ups.field, tg, Exec::Parallel); });

  const bool same_t = ts.values() == tp.values();
  const bool same_d = ds.values() == dp.values();
  std::printf("threads %d, nodes %d, steps %d, reps %d\n", omp_get_max_threads(),
              psi.phi.spec().node_count(), tg.steps, reps);
  std::printf("apply_T  serial %.4f s  parallel %.4f s  speedup %.2f  identical %s\n", t_ts, t_tp,
              t_ts / t_tp, same_t ? "yes" : "no");
  std::printf("apply_D  serial %.4f s  parallel %.4f s  speedup %.2f  identical %s\n", t_ds, t_dp,
              t_ds / t_dp, same_d ? "yes" : "no");
  return same_t && same_d ? 0 : 1;
}

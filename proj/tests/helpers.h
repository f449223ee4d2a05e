#pragma once

#include <memory>

#include "imlab/config.h"
#include "imlab/nonlinearity.h"
#include "imlab/spectral.h"

namespace imlab::test {

inline CutoffNonlinearity make_F(std::shared_ptr<const BaseMap> base, const SpectralProblem& problem,
                                 double R = 4.0, bool cutoff = true) {
  CutoffNonlinearity probe(base, problem.weights(), RadialCutoff(R, cutoff), {});
  return CutoffNonlinearity(base, problem.weights(), RadialCutoff(R, cutoff), probe.bound_constants());
}

inline Experiment default_experiment() { return build_experiment(parse_config("{}")); }

}  // namespace imlab::test

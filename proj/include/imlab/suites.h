#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imlab/config.h"
#include "imlab/harness.h"

namespace imlab {

struct SuiteResult {
  std::string name;
  int checks = 0;
  int violations = 0;
  double max_ratio = 0.0;  // worst measured / bound
  double seconds = 0.0;
  bool certification_failure = false;
  bool skipped = false;
  std::string detail;
  bool pass() const { return violations == 0; }
};

/// Relative slack granted to Gronwall-type envelopes for integration error.
inline constexpr double kEnvelopeBudget = 1e-8;

/// Property suites over one experiment. The solved limit manifold and its
/// derivative are computed once and shared.
class SuiteRunner {
 public:
  SuiteRunner(const Experiment& ex, std::uint64_t seed);

  static const std::vector<std::string>& names();
  SuiteResult run(const std::string& name);

  SuiteResult certification();
  SuiteResult distp();
  SuiteResult jnorm();
  SuiteResult dist_theta();
  SuiteResult psi_uniform();
  SuiteResult jdistance(double eps = 1e-2);

  const SolvedMember& limit_solution();
  const TimeGrid& time_grid();

 private:
  const Experiment& ex_;
  std::uint64_t seed_;
  std::optional<SolvedMember> limit_;
  std::optional<TimeGrid> tg_;
};

}  // namespace imlab

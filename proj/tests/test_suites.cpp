#include "doctest.h"
#include "helpers.h"
#include "imlab/errors.h"
#include "imlab/suites.h"

using namespace imlab;

TEST_SUITE("suites") {
  TEST_CASE("every suite passes on the default experiment") {
    const Experiment ex = imlab::test::default_experiment();
    SuiteRunner runner(ex, 0);
    for (const std::string& name : SuiteRunner::names()) {
      const SuiteResult r = runner.run(name);
      INFO(name << " " << r.detail);
      CHECK(r.name == name);
      CHECK(r.checks > 0);
      CHECK(r.violations == 0);
      CHECK(r.max_ratio <= 1.0 + kEnvelopeBudget);
      CHECK_FALSE(r.certification_failure);
    }
    CHECK_THROWS_AS(runner.run("nope"), ConfigError);
  }

  TEST_CASE("understated constants fail certification") {
    const Experiment ex =
        build_experiment(load_config(std::string(IMLAB_CONFIG_DIR) + "/misconfig.json"));
    SuiteRunner runner(ex, 0);
    const SuiteResult r = runner.certification();
    CHECK(r.certification_failure);
    CHECK_FALSE(r.pass());
    CHECK(r.detail.find("L_F") != std::string::npos);
  }

  TEST_CASE("fixtures skip certification") {
    const Experiment ex =
        build_experiment(load_config(std::string(IMLAB_CONFIG_DIR) + "/constant_fixture.json"));
    SuiteRunner runner(ex, 0);
    const SuiteResult r = runner.certification();
    CHECK(r.skipped);
    CHECK(r.pass());
  }
}

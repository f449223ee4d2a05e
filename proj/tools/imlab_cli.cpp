#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "imlab/config.h"
#include "imlab/errors.h"
#include "imlab/harness.h"
#include "imlab/lyapunov_perron.h"
#include "imlab/suites.h"

namespace fs = std::filesystem;
using namespace imlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInadmissible = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> eps_grid;
  std::optional<double> theta;
  std::optional<double> theta_star;
  std::optional<std::string> suites;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !(v >= 0.0)) throw ConfigError("--eps-grid: bad entry '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--eps-grid: empty list");
  return out;
}

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? parse_config("{}") : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.eps_grid) cfg.eps_grid = parse_grid(*o.eps_grid);
  if (o.theta) cfg.theta = *o.theta;
  if (o.theta_star) cfg.theta_star = *o.theta_star;
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  return dir;
}

nlohmann::ordered_json log_json(const IterationLog& log) {
  nlohmann::ordered_json j;
  j["iterations"] = log.iterations;
  j["diffs"] = log.diffs;
  j["ratios"] = log.ratios;
  j["max_ratio"] = log.max_ratio();
  return j;
}

nlohmann::ordered_json constants_json(const NonlinearityConstants& c) {
  return {{"C_F", c.C_F}, {"L_F", c.L_F}, {"L", c.L}, {"theta_F", c.theta_F}};
}

std::string manifold_csv(const GraphFunction& phi) {
  const GridSpec& g = phi.spec();
  std::string s;
  for (int i = 0; i < g.m(); ++i) s += (i ? ",p_" : "p_") + std::to_string(i + 1);
  for (int k = 0; k < g.q_size(); ++k) s += ",q_" + std::to_string(g.m() + k + 1);
  s += '\n';
  for (int j = 0; j < g.node_count(); ++j) {
    const Vec p = g.node(j);
    for (int i = 0; i < g.m(); ++i) s += (i ? "," : "") + num(p[i]);
    for (int k = 0; k < g.q_size(); ++k) s += "," + num(phi.values()(k, j));
    s += '\n';
  }
  return s;
}

std::string derivative_csv(const DerivativeField& f) {
  const GridSpec& g = f.spec();
  std::string s;
  for (int i = 0; i < g.m(); ++i) s += (i ? ",p_" : "p_") + std::to_string(i + 1);
  for (int k = 0; k < g.q_size(); ++k) {
    for (int i = 0; i < g.m(); ++i) {
      s += ",d_" + std::to_string(g.m() + k + 1) + "_" + std::to_string(i + 1);
    }
  }
  s += '\n';
  for (int j = 0; j < g.node_count(); ++j) {
    const Vec p = g.node(j);
    const Mat a = f.node_value(j);
    for (int i = 0; i < g.m(); ++i) s += (i ? "," : "") + num(p[i]);
    for (int k = 0; k < g.q_size(); ++k) {
      for (int i = 0; i < g.m(); ++i) s += "," + num(a(k, i));
    }
    s += '\n';
  }
  return s;
}

const char* kPlotScript = R"PY(import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

path = sys.argv[1] if len(sys.argv) > 1 else "report.csv"
df = pd.read_csv(path)
df = df[df["eps"] > 0].sort_values("eps")

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
ax = axes[0]
ax.loglog(df["eps"], df["d_sup"], "o-", label="d_sup")
ax.loglog(df["eps"], df["bound_sup"] * (df["d_sup"] / df["bound_sup"]).max(), "--", label="C (tau|log tau| + rho)")
ax.set_xlabel("eps")
ax.legend()
ax = axes[1]
ax.loglog(df["eps"], df["d_c1theta"], "o-", label="d_C1theta")
ax.loglog(df["eps"], df["bound_c1theta"] * (df["d_c1theta"] / df["bound_c1theta"]).max(), "--", label="C bound")
ax.set_xlabel("eps")
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
)PY";

// Shared admissibility gate for commands that solve.
int gate(const Experiment& ex, bool need_theta_star) {
  const GapReport& g = ex.gap;
  if (!g.check.pass) {
    std::cerr << "imlab: gap conditions fail (margins " << g.check.margin_gap << ", "
              << g.check.margin_power << ")\n";
    return kInadmissible;
  }
  const double th = ex.theta();
  if (!(th > 0.0) || th > g.theta_F || !(th < g.theta0)) {
    std::cerr << "imlab: theta = " << th << " outside (0, min(theta_F, theta0))\n";
    return kInadmissible;
  }
  if (need_theta_star && !g.admissible_theta) {
    std::cerr << "imlab: inadmissible exponents: theta = " << th
              << ", theta_star = " << ex.theta_star() << ", theta_tilde = " << g.theta_tilde
              << " (" << g.note << ")\n";
    return kInadmissible;
  }
  return kOk;
}

int cmd_check_gap(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const GapReport g = config_gap_report(cfg);
  std::cout << g.to_json() << "\n";
  return g.check.pass && g.admissible_theta ? kOk : kInadmissible;
}

int cmd_build(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  if (!config_gap_report(cfg).check.pass) {
    std::cerr << "imlab: gap conditions fail\n";
    return kInadmissible;
  }
  const Experiment ex = build_experiment(cfg);
  if (const int rc = gate(ex, false)) return rc;

  nlohmann::ordered_json cert;
  if (ex.fixture()) {
    cert["certification"] = {{"status", "skipped"}, {"reason", "analytic-fixture"}};
  } else {
    const CertifiedEstimates est = certify_constants(ex.F0, cfg.samples.certify, cfg.seed);
    cert["certification"] = {{"status", "passed"}, {"samples", est.pairs},
                             {"C_F", est.C_F},     {"L_F", est.L_F},
                             {"L", est.L}};
  }
  const SolvedMember s = solve_member(ex.limit, ex.F0, ex.theta(), cfg.solver);
  const double lhat = lipschitz_certificate(s.manifold.phi, cfg.samples.lipschitz_pairs, cfg.seed);
  const double mhat = holder_certificate(s.derivative.field, ex.theta());

  const fs::path dir = prepare_out(cfg);
  write_file(dir / "manifold.csv", manifold_csv(s.manifold.phi));
  write_file(dir / "derivative.csv", derivative_csv(s.derivative.field));
  cert["fixture"] = ex.fixture();
  cert["constants"] = constants_json(ex.constants);
  cert["theta"] = ex.theta();
  cert["M0"] = ex.gap.M0;
  cert["lipschitz"] = lhat;
  cert["holder"] = mhat;
  cert["lipschitz_below_one"] = lhat < 1.0;
  cert["holder_within_M0"] = mhat <= 1.1 * ex.gap.M0;
  cert["time_grid"] = {{"T", s.manifold.time.T}, {"h", s.manifold.time.h},
                       {"steps", s.manifold.time.steps}};
  cert["manifold"] = log_json(s.manifold.log);
  cert["derivative"] = log_json(s.derivative.log);
  write_file(dir / "certificates.json", cert.dump(2) + "\n");

  std::cout << "manifold: " << s.manifold.log.iterations << " iterations, max ratio "
            << s.manifold.log.max_ratio() << ", L_hat " << lhat << "\n"
            << "derivative: " << s.derivative.log.iterations << " iterations, M_hat " << mhat
            << " (M0 " << ex.gap.M0 << ")\n"
            << "wrote " << dir.string() << "\n";
  return kOk;
}

int cmd_distance_study(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  if (!config_gap_report(cfg).check.pass) {
    std::cerr << "imlab: gap conditions fail\n";
    return kInadmissible;
  }
  const Experiment ex = build_experiment(cfg);
  if (const int rc = gate(ex, true)) return rc;

  StudyOptions opt;
  opt.rho_samples = cfg.samples.rho;
  opt.seed = cfg.seed;
  const DistanceReport rep = rate_study(ex.family, ex.theta(), ex.theta_star(), cfg.solver, opt);

  const fs::path dir = prepare_out(cfg);
  write_file(dir / "report.csv", rep.to_csv());
  std::string meta = config_to_json(cfg);
  if (ex.fixture()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(meta);
    j["analytic_fixture"] = true;
    meta = j.dump();
  }
  write_file(dir / "report.json", rep.to_json(meta) + "\n");
  write_file(dir / "plot_report.py", kPlotScript);

  std::cout << "rows " << rep.rows.size() << ", C_sup " << rep.fit_sup.C << ", C_c1theta "
            << rep.fit_c1theta.C << ", monotone " << (rep.monotone_sup ? "yes" : "no")
            << ", all pass " << (rep.all_pass() ? "yes" : "no") << "\n"
            << "wrote " << dir.string() << "\n";
  return rep.all_pass() ? kOk : kNumerical;
}

int cmd_self_test(const Options& o) {
  std::vector<std::string> names = SuiteRunner::names();
  if (o.suites) {
    names = split(*o.suites);
    if (names.empty()) {
      std::cerr << "imlab: empty suite selection\n";
      return kUsage;
    }
    for (const auto& n : names) {
      const auto& all = SuiteRunner::names();
      if (std::find(all.begin(), all.end(), n) == all.end()) {
        std::cerr << "imlab: unknown suite '" << n << "'\n";
        return kUsage;
      }
    }
  }
  const ExperimentConfig cfg = resolve_config(o);
  if (!config_gap_report(cfg).check.pass) {
    std::cerr << "imlab: gap conditions fail\n";
    return kInadmissible;
  }
  const Experiment ex = build_experiment(cfg);
  if (const int rc = gate(ex, false)) return rc;

  // Certification runs first: the other suites trust the configured constants.
  std::stable_partition(names.begin(), names.end(), [](const std::string& n) { return n == "certification"; });
  SuiteRunner runner(ex, cfg.seed);
  int total = 0;
  for (const auto& n : names) {
    const SuiteResult r = runner.run(n);
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %s checks %d violations %d max_ratio %.6g (%.2f s)",
                  r.name.c_str(), r.skipped ? "SKIP" : (r.pass() ? "PASS" : "FAIL"), r.checks,
                  r.violations, r.max_ratio, r.seconds);
    std::cout << line;
    if (!r.detail.empty()) std::cout << "  " << r.detail;
    std::cout << "\n";
    if (r.certification_failure) {
      std::cerr << "imlab: certification failed; configured constants are below sampled values\n";
      return kInadmissible;
    }
    total += r.violations;
  }
  std::cout << "total violations " << total << "\n";
  return total == 0 ? kOk : kNumerical;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "imlab: config error: " << e.what() << "\n";
    return kUsage;
  } catch (const CertificationError& e) {
    std::cerr << "imlab: certification failed: " << e.what() << "\n";
    return kInadmissible;
  } catch (const AdmissibilityError& e) {
    std::cerr << "imlab: inadmissible: " << e.what() << "\n";
    return kInadmissible;
  } catch (const GapViolation& e) {
    std::cerr << "imlab: gap violation: " << e.what() << "\n";
    return kNumerical;
  } catch (const ConvergenceError& e) {
    std::cerr << "imlab: no convergence: " << e.what() << "\n";
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "imlab: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "imlab: invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    std::cerr << "imlab: invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "imlab: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-Perron inertial manifold laboratory"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment JSON")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "sampling seed");
    sub->add_option("--eps-grid", o.eps_grid, "comma-separated eps values");
    sub->add_option("--theta", o.theta, "Hoelder exponent theta");
    sub->add_option("--theta-star", o.theta_star, "interpolation exponent theta*");
  };
  CLI::App* check = app.add_subcommand("check-gap", "print the gap report");
  CLI::App* build = app.add_subcommand("build", "solve the manifold and its derivative");
  CLI::App* study = app.add_subcommand("distance-study", "two-problem rate study over the eps grid");
  CLI::App* self = app.add_subcommand("self-test", "run the property suites");
  for (CLI::App* sub : {check, build, study, self}) common(sub);
  self->add_option("--suites", o.suites, "comma-separated suite names")->expected(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (check->parsed()) return guarded([&] { return cmd_check_gap(o); });
  if (build->parsed()) return guarded([&] { return cmd_build(o); });
  if (study->parsed()) return guarded([&] { return cmd_distance_study(o); });
  return guarded([&] { return cmd_self_test(o); });
}

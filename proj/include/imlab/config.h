#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imlab/gap.h"
#include "imlab/harness.h"
#include "imlab/lyapunov_perron.h"
#include "imlab/nonlinearity.h"
#include "imlab/spectral.h"

namespace imlab {

struct SpectrumConfig {
  std::vector<double> eigenvalues;
  int m = 1;
  double alpha = 0.0;
};

struct DirectionConfig {
  std::string model = "rank_one_sine";  // or "zero"
  double amplitude = 0.05;
  double omega = 1.0;
  double phase = 0.3;
  int mode = 1;                          // one-based
  std::vector<double> direction;         // empty: d_k proportional to 1/k, unit norm
};

struct NonlinearityConfig {
  std::string model = "sine";  // sine | zero | constant | linear
  int K = 0;                   // active modes of the sine model, 0 = all
  double R = 4.0;
  double amplitude = 0.02;
  bool cutoff = true;
  std::optional<double> CF;
  std::optional<double> LF;
  std::optional<double> L;
  double thetaF = 1.0;
  std::vector<double> value;                // constant model
  std::vector<std::vector<double>> matrix;  // linear model
  DirectionConfig G;
  std::string eps_rule = "additive";
};

struct SampleConfig {
  std::size_t certify = 10000;
  std::size_t rho = 4000;
  std::size_t lipschitz_pairs = 1000;
  int suite_pairs = 100;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  SpectrumConfig spectrum;
  NonlinearityConfig nonlinearity;
  SolveSettings solver;
  ExtensionRule extension;
  std::vector<double> eps_grid{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  std::optional<double> theta;
  std::optional<double> theta_star;
  SampleConfig samples;
  std::string output = "out";
};

/// Parses the experiment JSON. Throws ConfigError on malformed input,
/// unknown keys or unknown rule names.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON form of a config (used for report metadata).
std::string config_to_json(const ExperimentConfig& cfg);

/// Everything derived from a config before any solve.
struct Experiment {
  ExperimentConfig config;
  SpectralProblem limit;
  CutoffNonlinearity F0;
  PerturbationFamily family;
  NonlinearityConstants constants;  // uniform over the family
  double kappa = 1.0;
  GapReport gap;

  bool fixture() const { return !config.nonlinearity.cutoff; }
  double theta() const { return gap.theta; }
  double theta_star() const { return gap.theta_star; }
};

Experiment build_experiment(const ExperimentConfig& cfg);

/// Gap report straight from the configured spectrum; works for spectra that
/// cannot be split (lambda_m = lambda_{m+1}).
GapReport config_gap_report(const ExperimentConfig& cfg);

}  // namespace imlab

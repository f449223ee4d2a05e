#include "imlab/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "imlab/errors.h"
#include "json.hpp"

namespace imlab {

namespace {

using json = nlohmann::json;

void allow_keys(const json& obj, const std::set<std::string>& keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::optional<double> get_constant(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number or \"auto\"");
  return v.get<double>();
}

std::vector<double> get_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

SpectrumConfig parse_spectrum(const json& j) {
  allow_keys(j, {"rule", "N", "eigenvalues", "m", "alpha"}, "spectrum");
  SpectrumConfig s;
  s.m = get_int(j, "m", 1, "spectrum");
  s.alpha = get_number(j, "alpha", 0.0, "spectrum");
  if (j.contains("eigenvalues")) {
    if (j.contains("rule")) throw ConfigError("spectrum: give either eigenvalues or rule");
    s.eigenvalues = get_list(j.at("eigenvalues"), "spectrum.eigenvalues");
  } else {
    const std::string rule = j.value("rule", std::string("i^2"));
    if (rule != "i^2") throw ConfigError("spectrum: unknown rule '" + rule + "'");
    const int n = get_int(j, "N", 32, "spectrum");
    if (n < 2) throw ConfigError("spectrum.N must be at least 2");
    for (int i = 1; i <= n; ++i) s.eigenvalues.push_back(static_cast<double>(i) * i);
  }
  if (s.eigenvalues.size() < 2) throw ConfigError("spectrum needs at least two eigenvalues");
  return s;
}

DirectionConfig parse_direction(const json& j) {
  allow_keys(j, {"model", "amplitude", "omega", "phase", "mode", "direction"}, "nonlinearity.G");
  DirectionConfig g;
  g.model = j.value("model", g.model);
  if (g.model != "rank_one_sine" && g.model != "zero") {
    throw ConfigError("nonlinearity.G: unknown model '" + g.model + "'");
  }
  g.amplitude = get_number(j, "amplitude", g.amplitude, "nonlinearity.G");
  g.omega = get_number(j, "omega", g.omega, "nonlinearity.G");
  g.phase = get_number(j, "phase", g.phase, "nonlinearity.G");
  g.mode = get_int(j, "mode", g.mode, "nonlinearity.G");
  if (j.contains("direction")) g.direction = get_list(j.at("direction"), "nonlinearity.G.direction");
  return g;
}

NonlinearityConfig parse_nonlinearity(const json& j) {
  allow_keys(j,
             {"model", "K", "R", "amplitude", "cutoff", "CF", "LF", "L", "thetaF", "value", "matrix",
              "G", "eps_rule"},
             "nonlinearity");
  NonlinearityConfig n;
  n.model = j.value("model", n.model);
  static const std::set<std::string> models{"sine", "zero", "constant", "linear"};
  if (!models.count(n.model)) throw ConfigError("nonlinearity: unknown model '" + n.model + "'");
  n.K = get_int(j, "K", 0, "nonlinearity");
  n.R = get_number(j, "R", n.R, "nonlinearity");
  n.amplitude = get_number(j, "amplitude", n.amplitude, "nonlinearity");
  if (j.contains("cutoff")) {
    if (!j.at("cutoff").is_boolean()) throw ConfigError("nonlinearity.cutoff must be a boolean");
    n.cutoff = j.at("cutoff").get<bool>();
  }
  n.CF = get_constant(j, "CF", "nonlinearity");
  n.LF = get_constant(j, "LF", "nonlinearity");
  n.L = get_constant(j, "L", "nonlinearity");
  n.thetaF = get_number(j, "thetaF", 1.0, "nonlinearity");
  if (j.contains("value")) n.value = get_list(j.at("value"), "nonlinearity.value");
  if (j.contains("matrix")) {
    const json& mj = j.at("matrix");
    if (!mj.is_array()) throw ConfigError("nonlinearity.matrix must be an array of rows");
    for (const auto& row : mj) n.matrix.push_back(get_list(row, "nonlinearity.matrix row"));
  }
  if (j.contains("G")) n.G = parse_direction(j.at("G"));
  n.eps_rule = j.value("eps_rule", n.eps_rule);
  if (n.eps_rule != "additive") throw ConfigError("nonlinearity: unknown eps_rule '" + n.eps_rule + "'");
  if (n.model == "constant" && n.value.empty()) throw ConfigError("constant model needs 'value'");
  if (n.model == "linear" && n.matrix.empty()) throw ConfigError("linear model needs 'matrix'");
  return n;
}

SolveSettings parse_solver(const json& j) {
  allow_keys(j, {"T_horizon", "h", "tol_fp", "max_iter", "grid_nodes", "box_factor"}, "solver");
  SolveSettings s;
  if (j.contains("T_horizon")) {
    const json& t = j.at("T_horizon");
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw ConfigError("solver.T_horizon must be \"auto\" or a number");
      s.T_horizon = 0.0;
    } else if (t.is_number()) {
      s.T_horizon = t.get<double>();
      if (!(s.T_horizon > 0.0)) throw ConfigError("solver.T_horizon must be positive");
    } else {
      throw ConfigError("solver.T_horizon must be \"auto\" or a number");
    }
  }
  s.h = get_number(j, "h", s.h, "solver");
  s.tol_fp = get_number(j, "tol_fp", s.tol_fp, "solver");
  s.max_iter = get_int(j, "max_iter", s.max_iter, "solver");
  s.grid_nodes = get_int(j, "grid_nodes", s.grid_nodes, "solver");
  s.box_factor = get_number(j, "box_factor", s.box_factor, "solver");
  if (s.max_iter < 1) throw ConfigError("solver.max_iter must be positive");
  return s;
}

ExtensionRule parse_extension(const json& j) {
  allow_keys(j, {"rule", "i", "j", "angle_per_eps"}, "family.extension");
  ExtensionRule e;
  const std::string rule = j.value("rule", std::string("identity"));
  if (rule == "identity") {
    e.kind = ExtensionRule::Kind::Identity;
  } else if (rule == "givens") {
    e.kind = ExtensionRule::Kind::Givens;
    e.i = get_int(j, "i", 1, "family.extension") - 1;
    e.j = get_int(j, "j", 2, "family.extension") - 1;
    e.angle_per_eps = get_number(j, "angle_per_eps", 1.0, "family.extension");
  } else {
    throw ConfigError("family.extension: unknown rule '" + rule + "'");
  }
  return e;
}

std::shared_ptr<const BaseMap> make_base(const NonlinearityConfig& n, int dim) {
  if (n.model == "zero") return std::make_shared<ConstantMap>(Vec::Zero(dim));
  if (n.model == "constant") {
    if (static_cast<int>(n.value.size()) > dim) throw ConfigError("constant value longer than N");
    Vec v = Vec::Zero(dim);
    for (std::size_t i = 0; i < n.value.size(); ++i) v[static_cast<Eigen::Index>(i)] = n.value[i];
    return std::make_shared<ConstantMap>(v);
  }
  if (n.model == "linear") {
    if (static_cast<int>(n.matrix.size()) != dim) throw ConfigError("linear matrix must be N x N");
    Mat a(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(n.matrix[r].size()) != dim) throw ConfigError("linear matrix must be N x N");
      for (int c = 0; c < dim; ++c) a(r, c) = n.matrix[r][c];
    }
    return std::make_shared<LinearMap>(a);
  }
  const int k = n.K > 0 ? std::min(n.K, dim) : dim;
  return SineMap::default_model(dim, k, n.amplitude);
}

std::shared_ptr<const BaseMap> make_direction(const DirectionConfig& g, int dim) {
  if (g.model == "zero") return std::make_shared<ConstantMap>(Vec::Zero(dim));
  Vec d(dim);
  if (g.direction.empty()) {
    for (int k = 0; k < dim; ++k) d[k] = 1.0 / (k + 1);
  } else {
    if (static_cast<int>(g.direction.size()) != dim) throw ConfigError("G.direction must have N entries");
    for (int k = 0; k < dim; ++k) d[k] = g.direction[k];
  }
  if (d.norm() == 0.0) throw ConfigError("G.direction must be nonzero");
  d.normalize();
  if (g.mode < 1 || g.mode > dim) throw ConfigError("G.mode out of range");
  return SineMap::rank_one(dim, g.amplitude, g.omega, g.phase, g.mode - 1, d);
}

Vec weights_of(const SpectrumConfig& s) {
  Vec w(static_cast<Eigen::Index>(s.eigenvalues.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::pow(s.eigenvalues[i], s.alpha);
  return w;
}

NonlinearityConstants apply_overrides(NonlinearityConstants c, const NonlinearityConfig& n) {
  if (n.CF) c.C_F = *n.CF;
  if (n.LF) c.L_F = *n.LF;
  if (n.L) c.L = *n.L;
  c.theta_F = n.thetaF;
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  allow_keys(j,
             {"seed", "spectrum", "nonlinearity", "solver", "family", "theta", "theta_star", "samples",
              "output"},
             "config");
  ExperimentConfig c;
  try {
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.spectrum = parse_spectrum(j.value("spectrum", json::object()));
    c.nonlinearity = parse_nonlinearity(j.value("nonlinearity", json::object()));
    c.solver = parse_solver(j.value("solver", json::object()));
    if (j.contains("family")) {
      const json& f = j.at("family");
      allow_keys(f, {"eigen_rule", "extension", "eps_grid"}, "family");
      const std::string rule = f.value("eigen_rule", std::string("scale"));
      if (rule != "scale") throw ConfigError("family: unknown eigen_rule '" + rule + "'");
      if (f.contains("extension")) c.extension = parse_extension(f.at("extension"));
      if (f.contains("eps_grid")) c.eps_grid = get_list(f.at("eps_grid"), "family.eps_grid");
    }
    if (j.contains("theta") && !j.at("theta").is_null()) c.theta = get_number(j, "theta", 0.0, "config");
    if (j.contains("theta_star") && !j.at("theta_star").is_null()) {
      c.theta_star = get_number(j, "theta_star", 0.0, "config");
    }
    if (j.contains("samples")) {
      const json& s = j.at("samples");
      allow_keys(s, {"certify", "rho", "lipschitz_pairs", "suite_pairs"}, "samples");
      c.samples.certify = static_cast<std::size_t>(get_int(s, "certify", 10000, "samples"));
      c.samples.rho = static_cast<std::size_t>(get_int(s, "rho", 4000, "samples"));
      c.samples.lipschitz_pairs = static_cast<std::size_t>(get_int(s, "lipschitz_pairs", 1000, "samples"));
      c.samples.suite_pairs = get_int(s, "suite_pairs", 100, "samples");
    }
    if (j.contains("output")) {
      if (!j.at("output").is_string()) throw ConfigError("output must be a string");
      c.output = j.at("output").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["spectrum"] = {{"eigenvalues", c.spectrum.eigenvalues}, {"m", c.spectrum.m}, {"alpha", c.spectrum.alpha}};
  const auto& n = c.nonlinearity;
  nlohmann::ordered_json nl = {{"model", n.model}, {"K", n.K},           {"R", n.R},
                               {"amplitude", n.amplitude}, {"cutoff", n.cutoff}, {"thetaF", n.thetaF},
                               {"eps_rule", n.eps_rule}};
  nl["CF"] = n.CF ? nlohmann::ordered_json(*n.CF) : nlohmann::ordered_json("auto");
  nl["LF"] = n.LF ? nlohmann::ordered_json(*n.LF) : nlohmann::ordered_json("auto");
  nl["L"] = n.L ? nlohmann::ordered_json(*n.L) : nlohmann::ordered_json("auto");
  nl["G"] = {{"model", n.G.model}, {"amplitude", n.G.amplitude}, {"omega", n.G.omega},
             {"phase", n.G.phase}, {"mode", n.G.mode}};
  j["nonlinearity"] = nl;
  j["solver"] = {{"T_horizon", c.solver.T_horizon > 0.0 ? nlohmann::ordered_json(c.solver.T_horizon)
                                                         : nlohmann::ordered_json("auto")},
                 {"h", c.solver.h},
                 {"tol_fp", c.solver.tol_fp},
                 {"max_iter", c.solver.max_iter},
                 {"grid_nodes", c.solver.grid_nodes},
                 {"box_factor", c.solver.box_factor}};
  nlohmann::ordered_json ext;
  if (c.extension.kind == ExtensionRule::Kind::Identity) {
    ext = {{"rule", "identity"}};
  } else {
    ext = {{"rule", "givens"}, {"i", c.extension.i + 1}, {"j", c.extension.j + 1},
           {"angle_per_eps", c.extension.angle_per_eps}};
  }
  j["family"] = {{"eigen_rule", "scale"}, {"extension", ext}, {"eps_grid", c.eps_grid}};
  return j.dump();
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  SpectralProblem limit(cfg.spectrum.eigenvalues, cfg.spectrum.m, cfg.spectrum.alpha);
  const auto& n = cfg.nonlinearity;
  if (!(n.R > 0.0)) throw ConfigError("nonlinearity.R must be positive");
  if (!(n.thetaF > 0.0 && n.thetaF <= 1.0)) throw ConfigError("nonlinearity.thetaF must lie in (0, 1]");
  const RadialCutoff cutoff(n.R, n.cutoff);
  const auto base = make_base(n, limit.size());
  const auto direction = make_direction(n.G, limit.size());

  NonlinearityConstants placeholder;
  placeholder.theta_F = n.thetaF;
  const CutoffNonlinearity probe(base, limit.weights(), cutoff, placeholder);
  const NonlinearityConstants bounds = family_bound_constants(
      limit, PerturbedNonlinearityPair(probe, direction, placeholder), cfg.extension, cfg.eps_grid);
  const NonlinearityConstants constants = apply_overrides(bounds, n);

  CutoffNonlinearity F0(base, limit.weights(), cutoff, constants);
  PerturbationFamily family(limit, PerturbedNonlinearityPair(F0, direction, constants), cfg.extension,
                            cfg.eps_grid);
  double kappa = 1.0;
  for (double e : cfg.eps_grid) kappa = std::max(kappa, family.pair(e).kappa());

  const GapInputs gin{limit.lambda_m(), limit.lambda_m1(), constants.L_F, kappa, limit.alpha()};
  GapReport gap = gap_report(gin, constants.theta_F, constants.L, cfg.theta.value_or(0.0),
                             cfg.theta_star.value_or(0.0));
  return Experiment{cfg, std::move(limit), std::move(F0), std::move(family), constants, kappa, std::move(gap)};
}

GapReport config_gap_report(const ExperimentConfig& cfg) {
  const auto& s = cfg.spectrum;
  if (s.m < 1 || s.m >= static_cast<int>(s.eigenvalues.size())) throw ConfigError("spectrum.m out of range");
  const double lm = s.eigenvalues[s.m - 1];
  const double lm1 = s.eigenvalues[s.m];
  if (lm < lm1) return build_experiment(cfg).gap;
  const auto& n = cfg.nonlinearity;
  NonlinearityConstants placeholder;
  placeholder.theta_F = n.thetaF;
  const CutoffNonlinearity probe(make_base(n, static_cast<int>(s.eigenvalues.size())), weights_of(s),
                                 RadialCutoff(n.R, n.cutoff), placeholder);
  const NonlinearityConstants c = apply_overrides(probe.bound_constants(), n);
  GapReport r = gap_report(GapInputs{lm, lm1, c.L_F, 1.0, s.alpha}, c.theta_F, c.L,
                           cfg.theta.value_or(0.0), cfg.theta_star.value_or(0.0));
  r.check.pass = false;
  r.note = "spectrum has no gap at the cut (lambda_m >= lambda_{m+1})";
  return r;
}

}  // namespace imlab

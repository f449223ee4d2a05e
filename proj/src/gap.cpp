#include "imlab/gap.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "imlab/errors.h"

namespace imlab {

namespace {

void validate(const GapInputs& in) {
  if (!(in.lambda_m > 0.0) || !(in.lambda_m1 > 0.0)) throw DomainError("eigenvalues must be positive");
  if (!(in.L_F >= 0.0)) throw DomainError("L_F must be nonnegative");
  if (!(in.kappa >= 1.0)) throw DomainError("kappa must be at least 1");
  if (!(in.alpha >= 0.0 && in.alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
}

}  // namespace

GapCheck check_gap(const GapInputs& in) {
  validate(in);
  const double am = std::pow(in.lambda_m, in.alpha);
  const double am1 = std::pow(in.lambda_m1, in.alpha);
  GapCheck c;
  c.margin_gap = in.lambda_m1 - in.lambda_m - 3.0 * (in.kappa + 2.0) * in.L_F * (am + am1);
  c.margin_power = std::pow(in.lambda_m, 1.0 - in.alpha) -
                   6.0 * (in.kappa + 2.0) * in.L_F / (1.0 - in.alpha);
  c.pass = c.margin_gap >= 0.0 && c.margin_power >= 0.0;
  return c;
}

double theta0(const GapInputs& in) {
  validate(in);
  const double am = std::pow(in.lambda_m, in.alpha);
  const double am1 = std::pow(in.lambda_m1, in.alpha);
  const double den = 2.0 * in.L_F * am + in.lambda_m;
  if (!(den > 0.0)) throw DomainError("theta0: nonpositive denominator");
  return (in.lambda_m1 - in.lambda_m - 4.0 * in.L_F * am - 2.0 * in.L_F * am1) / den;
}

double theta1(const GapInputs& in) {
  validate(in);
  const double am = std::pow(in.lambda_m, in.alpha);
  const double den = (in.kappa + 2.0) * in.L_F * am + in.lambda_m + 3.0;
  if (!(den > 0.0)) throw DomainError("theta1: nonpositive denominator");
  return (in.lambda_m1 - in.lambda_m - 4.0 * in.L_F * am) / den;
}

double theta_tilde(double theta_F, double t0, double t1) { return std::min({theta_F, t0, t1}); }

Exponents exponents(const GapInputs& in, double theta) {
  validate(in);
  const double am = std::pow(in.lambda_m, in.alpha);
  const double lf = in.L_F;
  const double base = in.lambda_m1 - (theta + 1.0) * in.lambda_m;
  Exponents e;
  e.Lambda0 = 2.0 * lf * am + in.lambda_m;
  e.Lambda1 = base - 2.0 * (theta + 1.0) * lf * am;
  e.Lambda2 = base - 2.0 * (theta + 2.0) * lf * am;
  e.Lambda3 = -(2.0 + (in.kappa + 2.0) * theta) * lf * am + base - 3.0 * theta;
  e.Lambda4 = -(4.0 + (in.kappa + 2.0) * theta) * lf * am + base - 3.0 * theta;
  return e;
}

double derivative_contraction(double lambda_m1, double L_F, double alpha, double Lambda2) {
  if (!(Lambda2 > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * L_F * std::pow(lambda_m1, alpha) / Lambda2;
}

double m0_bound(double lambda_m1, double L_F, double L, double alpha, double Lambda2) {
  const double am1 = std::pow(lambda_m1, alpha);
  const double den = Lambda2 - 2.0 * L_F * am1;
  if (!(den > 0.0)) {
    throw AdmissibilityError("derivative map does not contract (eta >= 1) at this theta");
  }
  return 8.0 * L * am1 / den;
}

GapReport gap_report(const GapInputs& in, double theta_F, double L, double theta,
                     double theta_star) {
  GapReport r;
  r.inputs = in;
  r.check = check_gap(in);
  r.theta_F = theta_F;
  r.theta0 = theta0(in);
  r.theta1 = theta1(in);
  r.theta_tilde = theta_tilde(theta_F, r.theta0, r.theta1);
  r.theta_star = theta_star > 0.0 ? theta_star : 0.9 * r.theta_tilde;
  r.theta = theta > 0.0 ? theta : 0.5 * r.theta_star;
  r.lambdas = exponents(in, r.theta);
  r.eta = derivative_contraction(in.lambda_m1, in.L_F, in.alpha, r.lambdas.Lambda2);
  r.admissible_theta = r.theta_tilde > 0.0 && r.theta > 0.0 && r.theta < r.theta_star &&
                       r.theta_star < r.theta_tilde && r.eta < 1.0;
  if (r.eta < 1.0) {
    r.M0 = m0_bound(in.lambda_m1, in.L_F, L, in.alpha, r.lambdas.Lambda2);
  } else {
    r.M0 = std::numeric_limits<double>::infinity();
  }
  if (!r.check.pass) {
    r.note = "gap conditions fail";
  } else if (!r.admissible_theta) {
    r.note = "exponents inadmissible: need 0 < theta < theta_star < theta_tilde and eta < 1";
  }
  return r;
}

std::string GapReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = check.pass;
  j["margins"] = {{"gap", check.margin_gap}, {"power", check.margin_power}};
  j["inputs"] = {{"lambda_m", inputs.lambda_m}, {"lambda_m1", inputs.lambda_m1},
                 {"L_F", inputs.L_F},           {"kappa", inputs.kappa},
                 {"alpha", inputs.alpha}};
  j["theta_F"] = theta_F;
  j["theta0"] = theta0;
  j["theta1"] = theta1;
  j["theta_tilde"] = theta_tilde;
  j["theta_star"] = theta_star;
  j["theta"] = theta;
  j["lambdas"] = {lambdas.Lambda0, lambdas.Lambda1, lambdas.Lambda2, lambdas.Lambda3,
                  lambdas.Lambda4};
  j["eta"] = eta;
  if (std::isfinite(M0)) {
    j["M0"] = M0;
  } else {
    j["M0"] = nullptr;
  }
  j["admissible_theta"] = admissible_theta;
  if (!note.empty()) j["note"] = note;
  return j.dump(2);
}

}  // namespace imlab

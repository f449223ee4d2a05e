#pragma once

#include <string>

namespace imlab {

struct GapInputs {
  double lambda_m = 0.0;
  double lambda_m1 = 0.0;
  double L_F = 0.0;
  double kappa = 1.0;
  double alpha = 0.0;
};

struct GapCheck {
  bool pass = false;
  double margin_gap = 0.0;    // lambda_{m+1} - lambda_m - 3(kappa+2) L_F (lambda_m^a + lambda_{m+1}^a)
  double margin_power = 0.0;  // lambda_m^{1-a} - 6(kappa+2) L_F / (1-a)
};

struct Exponents {
  double Lambda0 = 0.0;
  double Lambda1 = 0.0;
  double Lambda2 = 0.0;
  double Lambda3 = 0.0;
  double Lambda4 = 0.0;
};

GapCheck check_gap(const GapInputs& in);
double theta0(const GapInputs& in);
double theta1(const GapInputs& in);
double theta_tilde(double theta_F, double theta0, double theta1);
Exponents exponents(const GapInputs& in, double theta);

/// Contraction factor 2 L_F lambda_{m+1}^a / Lambda2 of the derivative map.
double derivative_contraction(double lambda_m1, double L_F, double alpha, double Lambda2);

/// Smallest M with 8 L lambda_{m+1}^a / Lambda2 + M * eta <= M.
double m0_bound(double lambda_m1, double L_F, double L, double alpha, double Lambda2);

struct GapReport {
  GapInputs inputs;
  GapCheck check;
  double theta_F = 1.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double theta_tilde = 0.0;
  double theta = 0.0;
  double theta_star = 0.0;
  Exponents lambdas;
  double eta = 0.0;
  double M0 = 0.0;
  bool admissible_theta = false;
  std::string note;

  std::string to_json() const;
};

/// Full report. theta and theta_star <= 0 select the defaults
/// 0.9 theta_tilde and 0.5 theta_star.
GapReport gap_report(const GapInputs& in, double theta_F, double L, double theta = 0.0,
                     double theta_star = 0.0);

}  // namespace imlab

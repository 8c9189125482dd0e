#pragma once

namespace krrtf::bounds {

struct Inputs {
  double lambda0 = 0.0;
  double by = 0.0;
  double kappa_min = 1.0;
};

struct ErrorLevels {
  double flip = 0.0;
  double sq = 0.0;
  double sq_tilde = 0.0;
};

// (1/sqrt(lambda0) + 1) B_y / lambda0
double c0(const Inputs& in);

double kw_star_bound(const Inputs& in);
double w_star_bound(const Inputs& in, int n);

// Largest admissible step: 1 / (lambda0 eps_flip + 1 + lambda0 / kappa_min).
double eta_limit(const Inputs& in, double eps_flip);
double contraction_limit(double eta, double lambda0, double eps_flip);

// Right side of the sqrt(N)||w^l - w*||_2 estimate for a given ||A||.
double error_envelope(const Inputs& in, int step, double norm_a, double eta,
                      const ErrorLevels& eps);

// (B_y/sqrt(lambda0) + 2(1 + lambda0)) / (lambda0 (1 - c) sqrt(kappa_min))
double residual_factor(const Inputs& in, double c);

double entrywise_bound(const Inputs& in, double c, int n);
double entrywise_bound_tilde(const Inputs& in, double c);

double prediction_gap_bound(const Inputs& in, int step, double eta, double c,
                            const ErrorLevels& eps);
// Step-independent part of prediction_gap_bound.
double prediction_gap_residual(const Inputs& in, double c, const ErrorLevels& eps);

double system_constant(const Inputs& in, double c);

}  // namespace krrtf::bounds

#include "krrtf/bounds.hpp"

#include <cmath>

namespace krrtf::bounds {

double c0(const Inputs& in) {
  return (1.0 / std::sqrt(in.lambda0) + 1.0) * in.by / in.lambda0;
}

double kw_star_bound(const Inputs& in) { return in.by / std::sqrt(in.lambda0); }

double w_star_bound(const Inputs& in, int n) { return c0(in) / static_cast<double>(n); }

double eta_limit(const Inputs& in, double eps_flip) {
  return 1.0 / (in.lambda0 * eps_flip + 1.0 + in.lambda0 / in.kappa_min);
}

double contraction_limit(double eta, double lambda0, double eps_flip) {
  return 1.0 - eta * lambda0 * (1.0 - eps_flip);
}

double error_envelope(const Inputs& in, int step, double norm_a, double eta,
                      const ErrorLevels& eps) {
  const double sk = std::sqrt(in.kappa_min);
  const double head = std::pow(norm_a, step) * c0(in) / sk;
  const double drive = kw_star_bound(in) * eps.flip + (1.0 + in.lambda0) * (eps.sq + eps.sq_tilde);
  return head + eta * drive / ((1.0 - norm_a) * sk);
}

double residual_factor(const Inputs& in, double c) {
  return (kw_star_bound(in) + 2.0 * (1.0 + in.lambda0)) /
         (in.lambda0 * (1.0 - c) * std::sqrt(in.kappa_min));
}

double entrywise_bound(const Inputs& in, double c, int n) {
  const double N = static_cast<double>(n);
  return (c0(in) / std::sqrt(in.kappa_min) + residual_factor(in, c)) / std::sqrt(N) + c0(in) / N;
}

double entrywise_bound_tilde(const Inputs& in, double c) {
  return c0(in) / std::sqrt(in.kappa_min) + residual_factor(in, c) + c0(in);
}

double prediction_gap_residual(const Inputs& in, double c, const ErrorLevels& eps) {
  const double drive = kw_star_bound(in) * eps.flip + (1.0 + in.lambda0) * (eps.sq + eps.sq_tilde);
  return drive / (in.lambda0 * (1.0 - c) * std::sqrt(in.kappa_min));
}

double prediction_gap_bound(const Inputs& in, int step, double eta, double c,
                            const ErrorLevels& eps) {
  const double rate = 1.0 - eta * in.lambda0 * (1.0 - c);
  return std::pow(rate, step) * c0(in) / std::sqrt(in.kappa_min) +
         prediction_gap_residual(in, c, eps);
}

double system_constant(const Inputs& in, double c) {
  return c0(in) * (2.0 / std::sqrt(in.kappa_min) + 1.0) + 2.0 * residual_factor(in, c) + 0.5;
}

}  // namespace krrtf::bounds

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krrtf/analysis.hpp"
#include "krrtf/io.hpp"

namespace krrtf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepBudgets {
  int richardson = 200;
  int cg = 40;
  int gd = 200;
  int nesterov = 200;
};

struct ExperimentConfig {
  std::string distribution = "spherical";
  int d = 5;
  int n = 40;
  double bandwidth = 1.0;
  double sigma_noise = 0.05;
  std::optional<double> clip_radius;

  // Per-sample lambda0, or total lambda (sigma_noise^2 when both are unset).
  std::optional<double> lambda0;
  std::optional<double> lambda;

  // Explicit step size; method defaults when unset.
  std::optional<double> eta;
  double c = 0.5;
  double eps = 0.05;
  std::optional<int> iterations;
  std::optional<double> b_x;
  std::optional<double> b_y;
  int max_iterations = 5000;

  StepBudgets steps;
  double cg_tol = 1e-12;
  int batch = 64;
  std::uint64_t seed = 0;
  std::string out = "out";

  bool transformer = false;
  std::vector<int> context_lengths;

  double sigma_train = 0.05;
  std::vector<double> sigma_test = {0.01, 0.05, 0.1, 0.25, 0.5, 1.0};
  int l_finite = 12;
  std::vector<std::string> sweep_distributions = {"uniform", "gaussian", "spherical"};

  DistributionSpec distribution_spec() const;
  Regularization regularization() const;
  double input_bound() const;
  std::vector<int> resolved_context_lengths() const;
  void validate() const;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  // Hash of every field except the output directory.
  std::string hash() const;
};

ExperimentConfig load_config(const std::string& path);

}  // namespace krrtf

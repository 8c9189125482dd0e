#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "krrtf/kernel.hpp"

namespace krrtf {

using Rng = std::mt19937_64;

enum class Distribution { UniformCube, Gaussian, Spherical };

std::string distribution_name(Distribution k);
Distribution parse_distribution(const std::string& name);

struct DistributionSpec {
  Distribution kind = Distribution::Spherical;
  int d = 5;
  double half_width = 1.0;
  double gaussian_std = 0.6;
  double radius = 1.0;
  // Gaussian samples longer than this are projected onto the ball.
  std::optional<double> clip_radius;

  // A priori bound on ||x||; throws for unclipped Gaussian inputs.
  double input_bound() const;
};

struct GpTask {
  MatrixXd X;         // (N+1) x d, last row is the query
  VectorXd f_values;  // N+1 latent values
  VectorXd y_noisy;   // N labels
  double sigma_noise = 0.0;
  std::uint64_t seed = 0;
  int clipped = 0;

  int n() const { return static_cast<int>(y_noisy.size()); }
  double query_target() const { return f_values[f_values.size() - 1]; }
  // y_2..y_N followed by the noiseless query target.
  VectorXd next_labels() const;
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Rows are points. `clipped` counts projected Gaussian samples when given.
MatrixXd sample_inputs(const DistributionSpec& spec, int count, Rng& rng, int* clipped = nullptr);

VectorXd sample_gp(const MatrixXd& X, const KernelParams& params, Rng& rng);

GpTask make_task(const DistributionSpec& spec, int n, const KernelParams& params,
                 double sigma_noise, std::uint64_t seed);

std::vector<GpTask> make_batch(const DistributionSpec& spec, int n, const KernelParams& params,
                               double sigma_noise, int count, std::uint64_t master_seed);

}  // namespace krrtf

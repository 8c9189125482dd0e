#include "krrtf/tasks.hpp"

#include <cmath>
#include <stdexcept>

namespace krrtf {

std::string distribution_name(Distribution k) {
  switch (k) {
    case Distribution::UniformCube: return "uniform";
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Spherical: return "spherical";
  }
  return "unknown";
}

Distribution parse_distribution(const std::string& name) {
  if (name == "uniform" || name == "uniform_cube") return Distribution::UniformCube;
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "spherical") return Distribution::Spherical;
  throw std::invalid_argument("unknown distribution: " + name);
}

double DistributionSpec::input_bound() const {
  switch (kind) {
    case Distribution::UniformCube: return half_width * std::sqrt(static_cast<double>(d));
    case Distribution::Spherical: return radius;
    case Distribution::Gaussian:
      if (!clip_radius) throw std::invalid_argument("gaussian inputs are unbounded without clipping");
      return *clip_radius;
  }
  return 0.0;
}

VectorXd GpTask::next_labels() const {
  const int N = n();
  VectorXd out(N);
  for (int i = 1; i < N; ++i) out[i - 1] = y_noisy[i];
  out[N - 1] = query_target();
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MatrixXd sample_inputs(const DistributionSpec& spec, int count, Rng& rng, int* clipped) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  if (spec.d < 1) throw std::invalid_argument("dimension must be positive");
  MatrixXd X(count, spec.d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-spec.half_width, spec.half_width);
  int n_clipped = 0;
  for (int i = 0; i < count; ++i) {
    switch (spec.kind) {
      case Distribution::UniformCube:
        for (int k = 0; k < spec.d; ++k) X(i, k) = uniform(rng);
        break;
      case Distribution::Gaussian: {
        for (int k = 0; k < spec.d; ++k) X(i, k) = spec.gaussian_std * normal(rng);
        const double norm = X.row(i).norm();
        if (spec.clip_radius && norm > *spec.clip_radius) {
          X.row(i) *= *spec.clip_radius / norm;
          ++n_clipped;
        }
        break;
      }
      case Distribution::Spherical: {
        double norm = 0.0;
        do {
          for (int k = 0; k < spec.d; ++k) X(i, k) = normal(rng);
          norm = X.row(i).norm();
        } while (norm == 0.0);
        X.row(i) *= spec.radius / norm;
        break;
      }
    }
  }
  if (clipped) *clipped = n_clipped;
  return X;
}

VectorXd sample_gp(const MatrixXd& X, const KernelParams& params, Rng& rng) {
  const MatrixXd K = kernel_matrix(X, params);
  const double scale = K.diagonal().mean();
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd z(X.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  for (double jitter = 1e-10; jitter <= 1e-6 * (1.0 + 1e-9); jitter *= 10.0) {
    MatrixXd A = K;
    A.diagonal().array() += jitter * scale;
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return llt.matrixL() * z;
  }
  throw std::runtime_error("GP covariance factorization failed at maximum jitter");
}

GpTask make_task(const DistributionSpec& spec, int n, const KernelParams& params,
                 double sigma_noise, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("task needs at least one context point");
  if (!(sigma_noise >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
  Rng rng(seed);
  GpTask task;
  task.seed = seed;
  task.sigma_noise = sigma_noise;
  task.X = sample_inputs(spec, n + 1, rng, &task.clipped);
  task.f_values = sample_gp(task.X, params, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  task.y_noisy = task.f_values.head(n);
  if (sigma_noise > 0.0) {
    for (int i = 0; i < n; ++i) task.y_noisy[i] += sigma_noise * normal(rng);
  }
  return task;
}

std::vector<GpTask> make_batch(const DistributionSpec& spec, int n, const KernelParams& params,
                               double sigma_noise, int count, std::uint64_t master_seed) {
  if (count < 0) throw std::invalid_argument("batch size must be non-negative");
  std::vector<GpTask> batch;
  batch.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    batch.push_back(make_task(spec, n, params, sigma_noise, derive_seed(master_seed, i)));
  }
  return batch;
}

}  // namespace krrtf

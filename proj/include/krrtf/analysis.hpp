#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krrtf/construct.hpp"
#include "krrtf/solvers.hpp"
#include "krrtf/tasks.hpp"

namespace krrtf {

// Either a per-sample lambda0 (lambda = lambda0 n) or a fixed total lambda.
struct Regularization {
  enum class Kind { PerSample, Total };
  Kind kind = Kind::Total;
  double value = 0.0025;

  static Regularization per_sample(double lambda0) { return {Kind::PerSample, lambda0}; }
  static Regularization total(double lambda) { return {Kind::Total, lambda}; }
  double lambda_for(int n) const;
  double lambda0_for(int n) const;
};

KernelSystem prefix_system(const GpTask& task, int n, const KernelParams& params,
                           const Regularization& reg);

struct SolverSetup {
  Method method = Method::Richardson;
  int steps = 100;
  double cg_tol = 1e-12;
  // Default step sizes when unset.
  std::optional<double> eta;
  std::optional<double> beta;
};

// Row n-1: predictions at x_{n+1} from the first n pairs, one column per step.
MatrixXd solver_prefix_predictions(const GpTask& task, const KernelParams& params,
                                   const Regularization& reg, const SolverSetup& setup);

VectorXd direct_prefix_predictions(const GpTask& task, const KernelParams& params,
                                   const Regularization& reg);

struct TransformerSetup {
  double c = 0.5;
  double eps = 0.05;
  double bx = 1.0;
  // Label bound; the prefix's max |y| when unset.
  std::optional<double> by;
  std::optional<double> eta;
  // Iteration pairs; the plan's L when unset.
  std::optional<int> pairs;
};

ConstructionParams prefix_construction(const GpTask& task, int n, const KernelParams& params,
                                       const Regularization& reg, const TransformerSetup& setup);

// Row n-1: predictions from the w row after each iteration pair (column 0 = read-in).
MatrixXd transformer_prefix_predictions(const GpTask& task, const KernelParams& params,
                                        const Regularization& reg, const TransformerSetup& setup);

// Exact Richardson per prefix with the construction's eta and lambda0.
MatrixXd construction_reference_predictions(const GpTask& task, const KernelParams& params,
                                            const Regularization& reg,
                                            const TransformerSetup& setup, int steps);

struct ErrorVector {
  VectorXd entries;
  std::string tag;
  int task = 0;
};

ErrorVector prefix_error_vector(const VectorXd& predictions, const VectorXd& labels,
                                const std::string& tag = "", int task = 0);

// Subtracts the labels from every column.
MatrixXd error_matrix(const MatrixXd& predictions, const VectorXd& labels);

struct SimeValue {
  double value = 0.0;
  int zero_vectors = 0;
};

double cosine(const VectorXd& u, const VectorXd& v, bool* zero = nullptr);

// Mean cosine over tasks. Zero vectors contribute 0 unless skip_zero.
SimeValue sime(const std::vector<VectorXd>& layer_errors, const std::vector<VectorXd>& step_errors,
               bool skip_zero = false);

struct SimEMatrix {
  MatrixXd mean;
  std::vector<MatrixXd> per_task;
  int batch = 0;
  int zero_vectors = 0;
};

// Inputs per task: columns are layers (resp. steps) of error vectors.
SimEMatrix sime_matrix(const std::vector<MatrixXd>& layer_errors,
                       const std::vector<MatrixXd>& step_errors, bool skip_zero = false);

struct ArgmaxTrajectory {
  VectorXd mean;
  VectorXd stddev;
  std::vector<int> grid_argmax;
  int fit_first = 0;
  int fit_last = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  bool degenerate = false;
};

// Fit over layers [first, last]; last < 0 means the final layer.
ArgmaxTrajectory argmax_trajectory(const SimEMatrix& m, int first = 0, int last = -1);

struct MseRow {
  int curve = 0;
  int n = 0;
  double mse = 0.0;
};

// predictions: per task, rows are prefixes, columns are curves.
std::vector<MseRow> mse_curves(const std::vector<MatrixXd>& predictions,
                               const std::vector<GpTask>& tasks,
                               const std::vector<int>& context_lengths);

struct NoiseSweepSetup {
  DistributionSpec spec;
  int n = 40;
  double bandwidth = 1.0;
  double sigma_train = 0.05;
  std::vector<double> sigma_test;
  int l_finite = 12;
  int tasks_per_level = 64;
  std::uint64_t seed = 0;
};

struct NoiseSweepRow {
  std::string distribution;
  double sigma_test = 0.0;
  std::string predictor;
  double mse = 0.0;
  double ratio = 0.0;
};

std::vector<NoiseSweepRow> noise_sweep(const NoiseSweepSetup& setup);

}  // namespace krrtf

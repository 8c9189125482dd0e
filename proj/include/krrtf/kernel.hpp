#pragma once

#include <Eigen/Dense>

namespace krrtf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct KernelParams {
  double bandwidth = 1.0;

  explicit KernelParams(double v = 1.0);
};

// Inputs are stored one point per row.
struct KernelSystem {
  MatrixXd X;
  VectorXd y;
  double lambda0 = 0.0;
  double lambda = 0.0;
  MatrixXd K;
  VectorXd D;
  KernelParams params;

  int size() const { return static_cast<int>(y.size()); }
  // K + lambda I
  MatrixXd regularized() const;
};

struct DataBounds {
  double bx = 0.0;
  double by = 0.0;
  double kappa_min = 1.0;
};

double squared_distance(const Eigen::Ref<const VectorXd>& a,
                        const Eigen::Ref<const VectorXd>& b);

double gaussian_kernel(const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& x2,
                       const KernelParams& params);

MatrixXd kernel_matrix(const MatrixXd& X, const KernelParams& params);

// k_i = K(x_i, x_query) for every row of X.
VectorXd kernel_column(const MatrixXd& X, const Eigen::Ref<const VectorXd>& x_query,
                       const KernelParams& params);

KernelSystem assemble_system(const MatrixXd& X, const VectorXd& y, double lambda0,
                             const KernelParams& params);

// Same system with the total regularizer given instead of lambda0.
KernelSystem assemble_system_total(const MatrixXd& X, const VectorXd& y, double lambda,
                                   const KernelParams& params);

double compute_kappa_min(double bx, const KernelParams& params);

DataBounds make_bounds(double bx, double by, const KernelParams& params);

}  // namespace krrtf

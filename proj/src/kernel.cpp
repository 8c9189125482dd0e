#include "krrtf/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace krrtf {

KernelParams::KernelParams(double v) : bandwidth(v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  }
}

MatrixXd KernelSystem::regularized() const {
  MatrixXd A = K;
  A.diagonal().array() += lambda;
  return A;
}

double squared_distance(const Eigen::Ref<const VectorXd>& a,
                        const Eigen::Ref<const VectorXd>& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

double gaussian_kernel(const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& x2,
                       const KernelParams& params) {
  const double v = params.bandwidth;
  return std::exp(-squared_distance(x, x2) / (2.0 * v * v));
}

MatrixXd kernel_matrix(const MatrixXd& X, const KernelParams& params) {
  const Eigen::Index n = X.rows();
  MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = gaussian_kernel(X.row(i).transpose(), X.row(j).transpose(), params);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

VectorXd kernel_column(const MatrixXd& X, const Eigen::Ref<const VectorXd>& x_query,
                       const KernelParams& params) {
  VectorXd k(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    k[i] = gaussian_kernel(X.row(i).transpose(), x_query, params);
  }
  return k;
}

KernelSystem assemble_system(const MatrixXd& X, const VectorXd& y, double lambda0,
                             const KernelParams& params) {
  if (X.rows() == 0) throw std::invalid_argument("kernel system needs at least one point");
  if (X.rows() != y.size()) throw std::invalid_argument("inputs and labels differ in length");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite prompt data");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
  KernelSystem s;
  s.X = X;
  s.y = y;
  s.params = params;
  s.lambda0 = lambda0;
  s.lambda = lambda0 * static_cast<double>(X.rows());
  s.K = kernel_matrix(X, params);
  s.D = s.K.rowwise().sum();
  return s;
}

KernelSystem assemble_system_total(const MatrixXd& X, const VectorXd& y, double lambda,
                                   const KernelParams& params) {
  if (X.rows() == 0) throw std::invalid_argument("kernel system needs at least one point");
  KernelSystem s = assemble_system(X, y, lambda / static_cast<double>(X.rows()), params);
  s.lambda = lambda;
  return s;
}

double compute_kappa_min(double bx, const KernelParams& params) {
  if (bx < 0.0) throw std::invalid_argument("B_x must be non-negative");
  const double v = params.bandwidth;
  return std::exp(-2.0 * bx * bx / (v * v));
}

DataBounds make_bounds(double bx, double by, const KernelParams& params) {
  if (!(by > 0.0)) throw std::invalid_argument("B_y must be positive");
  return DataBounds{bx, by, compute_kappa_min(bx, params)};
}

}  // namespace krrtf

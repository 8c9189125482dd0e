#pragma once

#include "krrtf/kernel.hpp"
#include "oracle_values.hpp"

namespace fixtures {

inline Eigen::MatrixXd oracle_inputs() {
  Eigen::MatrixXd X(7, 2);
  for (int i = 0; i < 7; ++i) {
    X(i, 0) = oracle::kX[2 * i];
    X(i, 1) = oracle::kX[2 * i + 1];
  }
  return X;
}

inline Eigen::VectorXd oracle_labels() { return Eigen::Map<const Eigen::VectorXd>(oracle::kY, 7); }

inline Eigen::VectorXd oracle_query() { return Eigen::Map<const Eigen::VectorXd>(oracle::kQuery, 2); }

inline krrtf::KernelSystem oracle_system() {
  return krrtf::assemble_system(oracle_inputs(), oracle_labels(), oracle::kLambda0, krrtf::KernelParams(1.0));
}

inline Eigen::VectorXd vec(const double* p, int n) { return Eigen::Map<const Eigen::VectorXd>(p, n); }

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures

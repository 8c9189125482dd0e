#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "krrtf/kernel.hpp"

namespace krrtf {

enum class Method { Richardson, ConjugateGradient, GradientDescent, Nesterov, InexactRichardson };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct SolverTrace {
  Method method = Method::Richardson;
  double eta = 0.0;
  double beta = 0.0;
  std::vector<VectorXd> iterates;

  int steps() const { return static_cast<int>(iterates.size()) - 1; }
  // Iterate t, holding the final one once a run has terminated early.
  const VectorXd& at(int t) const;
};

enum class PerturbationMode { Zero, AdversarialSign, Random };

struct PerturbationSpec {
  double eps_flip = 0.0;
  double eps_sq = 0.0;
  double eps_sq_tilde = 0.0;
  std::uint64_t seed = 0;
  PerturbationMode mode = PerturbationMode::Zero;
};

VectorXd solve_krr_direct(const KernelSystem& system);

double predict(const KernelSystem& system, const VectorXd& w,
               const Eigen::Ref<const VectorXd>& x_query);

SolverTrace richardson_precond_run(const KernelSystem& system, double eta, int T);
double default_eta_richardson(const KernelSystem& system);
// Condition number of D^{-1/2}(K + lambda I)D^{-1/2}.
double preconditioned_condition(const KernelSystem& system);

SolverTrace cg_run(const KernelSystem& system, int T, double tol);

struct GradientSteps {
  double eta = 0.0;
  double beta = 0.0;
  double eig_max = 0.0;
  double eig_min = 0.0;
};

// Step sizes from the spectrum of K(K + lambda I).
GradientSteps default_gradient_steps(const KernelSystem& system);

SolverTrace gd_run(const KernelSystem& system, double eta, int T);
SolverTrace nesterov_run(const KernelSystem& system, double eta, double beta, int T);

SolverTrace inexact_richardson_run(const KernelSystem& system, double eta, int T,
                                   const PerturbationSpec& pert);

// Spectral norm of I - eta(lambda diag(r) + D^{-1/2}(K + lambda I)D^{-1/2}).
double contraction_norm(const KernelSystem& system, double eta, const VectorXd& r);

// First step t with ||w^(t) - target||_2 <= tol, or -1.
int first_passage(const SolverTrace& trace, const VectorXd& target, double tol);

}  // namespace krrtf

#include "krrtf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace krrtf {

namespace {

double sign_of(double v) { return v >= 0.0 ? 1.0 : -1.0; }

MatrixXd scaled_system(const KernelSystem& s) {
  const VectorXd dinv = s.D.array().rsqrt();
  return dinv.asDiagonal() * s.regularized() * dinv.asDiagonal();
}

void check_steps(int T) {
  if (T < 0) throw std::invalid_argument("step budget must be non-negative");
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Richardson: return "richardson";
    case Method::ConjugateGradient: return "cg";
    case Method::GradientDescent: return "gd";
    case Method::Nesterov: return "nesterov";
    case Method::InexactRichardson: return "inexact_richardson";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "richardson" || name == "pr") return Method::Richardson;
  if (name == "cg") return Method::ConjugateGradient;
  if (name == "gd") return Method::GradientDescent;
  if (name == "nesterov") return Method::Nesterov;
  if (name == "inexact_richardson") return Method::InexactRichardson;
  throw std::invalid_argument("unknown method: " + name);
}

const VectorXd& SolverTrace::at(int t) const {
  if (iterates.empty()) throw std::out_of_range("empty trace");
  if (t < 0) throw std::out_of_range("negative step");
  return iterates[std::min<std::size_t>(static_cast<std::size_t>(t), iterates.size() - 1)];
}

VectorXd solve_krr_direct(const KernelSystem& system) {
  Eigen::LLT<MatrixXd> llt(system.regularized());
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("Cholesky factorization of K + lambda I failed");
  }
  return llt.solve(system.y);
}

double predict(const KernelSystem& system, const VectorXd& w,
               const Eigen::Ref<const VectorXd>& x_query) {
  if (w.size() != system.size()) throw std::invalid_argument("dual vector has wrong length");
  double s = 0.0;
  for (int i = 0; i < system.size(); ++i) {
    s += w[i] * gaussian_kernel(system.X.row(i).transpose(), x_query, system.params);
  }
  return s;
}

SolverTrace richardson_precond_run(const KernelSystem& system, double eta, int T) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  check_steps(T);
  const MatrixXd A = system.regularized();
  const VectorXd dinv = system.D.cwiseInverse();
  SolverTrace trace;
  trace.method = Method::Richardson;
  trace.eta = eta;
  trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
  VectorXd w = VectorXd::Zero(system.size());
  trace.iterates.push_back(w);
  for (int t = 0; t < T; ++t) {
    w += eta * dinv.cwiseProduct(system.y - A * w);
    trace.iterates.push_back(w);
  }
  return trace;
}

double default_eta_richardson(const KernelSystem& system) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled_system(system), Eigen::EigenvaluesOnly);
  return 1.0 / es.eigenvalues().maxCoeff();
}

double preconditioned_condition(const KernelSystem& system) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled_system(system), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

SolverTrace cg_run(const KernelSystem& system, int T, double tol) {
  if (T < 1) throw std::invalid_argument("CG needs at least one step");
  const MatrixXd A = system.regularized();
  SolverTrace trace;
  trace.method = Method::ConjugateGradient;
  VectorXd w = VectorXd::Zero(system.size());
  VectorXd r = system.y;
  VectorXd p = r;
  double rr = r.squaredNorm();
  trace.iterates.push_back(w);
  for (int t = 0; t < T; ++t) {
    if (std::sqrt(rr) <= tol) break;
    const VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rr / pAp;
    w += alpha * p;
    r -= alpha * Ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    trace.iterates.push_back(w);
  }
  return trace;
}

GradientSteps default_gradient_steps(const KernelSystem& system) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(system.K, Eigen::EigenvaluesOnly);
  const double lam = system.lambda;
  // K and K + lambda I commute, so K(K + lambda I) has eigenvalues mu(mu + lambda).
  const double mu_max = std::max(es.eigenvalues().maxCoeff(), 0.0);
  const double mu_min = std::max(es.eigenvalues().minCoeff(), 0.0);
  GradientSteps g;
  g.eig_max = mu_max * (mu_max + lam);
  g.eig_min = mu_min * (mu_min + lam);
  g.eta = 1.0 / g.eig_max;
  if (g.eig_min > 0.0) {
    const double root = std::sqrt(g.eig_max / g.eig_min);
    g.beta = (root - 1.0) / (root + 1.0);
  } else {
    g.beta = 1.0;
  }
  return g;
}

SolverTrace gd_run(const KernelSystem& system, double eta, int T) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  check_steps(T);
  const MatrixXd A = system.regularized();
  SolverTrace trace;
  trace.method = Method::GradientDescent;
  trace.eta = eta;
  trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
  VectorXd w = VectorXd::Zero(system.size());
  trace.iterates.push_back(w);
  for (int t = 0; t < T; ++t) {
    w -= eta * (system.K * (A * w - system.y));
    trace.iterates.push_back(w);
  }
  return trace;
}

SolverTrace nesterov_run(const KernelSystem& system, double eta, double beta, int T) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  check_steps(T);
  const MatrixXd A = system.regularized();
  SolverTrace trace;
  trace.method = Method::Nesterov;
  trace.eta = eta;
  trace.beta = beta;
  trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
  VectorXd w = VectorXd::Zero(system.size());
  VectorXd z = w;
  trace.iterates.push_back(w);
  for (int t = 0; t < T; ++t) {
    const VectorXd z_next = w - eta * (system.K * (A * w - system.y));
    w = z_next + beta * (z_next - z);
    z = z_next;
    trace.iterates.push_back(w);
  }
  return trace;
}

SolverTrace inexact_richardson_run(const KernelSystem& system, double eta, int T,
                                   const PerturbationSpec& pert) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  check_steps(T);
  for (double e : {pert.eps_flip, pert.eps_sq, pert.eps_sq_tilde}) {
    if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("perturbation level outside [0, 1)");
  }
  const int n = system.size();
  const double N = static_cast<double>(n);
  const double cap_r = pert.eps_flip / N;
  const double cap_sq = pert.eps_sq / N;
  const double cap_t = pert.eps_sq_tilde / (N * N);
  const double lam = system.lambda;

  VectorXd r = VectorXd::Zero(n);
  VectorXd tau_p = VectorXd::Zero(n);
  VectorXd tau_m = VectorXd::Zero(n);
  std::mt19937_64 rng(pert.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  VectorXd w_star;
  if (pert.mode == PerturbationMode::AdversarialSign) {
    w_star = solve_krr_direct(system);
    const VectorXd kw = system.K * w_star;
    for (int i = 0; i < n; ++i) {
      const double e0 = sign_of(-w_star[i]);
      r[i] = cap_r * e0 * sign_of(kw[i]);
      tau_p[i] = cap_sq * e0;
      tau_m[i] = -cap_sq * e0;
    }
  } else if (pert.mode == PerturbationMode::Random) {
    for (int i = 0; i < n; ++i) r[i] = cap_r * unit(rng);
    for (int i = 0; i < n; ++i) tau_p[i] = cap_sq * unit(rng);
    for (int i = 0; i < n; ++i) tau_m[i] = cap_sq * unit(rng);
  }

  const MatrixXd A = system.regularized();
  const VectorXd dinv = system.D.cwiseInverse();
  SolverTrace trace;
  trace.method = Method::InexactRichardson;
  trace.eta = eta;
  trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
  VectorXd w = VectorXd::Zero(n);
  VectorXd tt_p = VectorXd::Zero(n);
  VectorXd tt_m = VectorXd::Zero(n);
  trace.iterates.push_back(w);
  for (int t = 0; t < T; ++t) {
    if (pert.mode == PerturbationMode::AdversarialSign) {
      for (int i = 0; i < n; ++i) {
        const double s = sign_of(w[i] - w_star[i]);
        tt_p[i] = -cap_t * s;
        tt_m[i] = cap_t * s;
      }
    } else if (pert.mode == PerturbationMode::Random) {
      for (int i = 0; i < n; ++i) tt_p[i] = cap_t * unit(rng);
      for (int i = 0; i < n; ++i) tt_m[i] = cap_t * unit(rng);
    }
    const VectorXd exact = dinv.cwiseProduct(system.y - A * w);
    const VectorXd extra = (system.y - lam * w).cwiseProduct(r) +
                           0.25 * (tau_p - tau_m - lam * tt_p + lam * tt_m);
    w += eta * (exact + extra);
    trace.iterates.push_back(w);
  }
  return trace;
}

double contraction_norm(const KernelSystem& system, double eta, const VectorXd& r) {
  if (r.size() != system.size()) throw std::invalid_argument("r has wrong length");
  MatrixXd M = -eta * scaled_system(system);
  M.diagonal().array() += 1.0;
  M.diagonal() -= eta * system.lambda * r;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int first_passage(const SolverTrace& trace, const VectorXd& target, double tol) {
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    if ((trace.iterates[t] - target).norm() <= tol) return static_cast<int>(t);
  }
  return -1;
}

}  // namespace krrtf

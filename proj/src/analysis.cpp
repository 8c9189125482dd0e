#include "krrtf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "krrtf/parallel.hpp"

namespace krrtf {

double Regularization::lambda_for(int n) const {
  return kind == Kind::PerSample ? value * static_cast<double>(n) : value;
}

double Regularization::lambda0_for(int n) const {
  return kind == Kind::PerSample ? value : value / static_cast<double>(n);
}

KernelSystem prefix_system(const GpTask& task, int n, const KernelParams& params,
                           const Regularization& reg) {
  if (n < 1 || n > task.n()) throw std::out_of_range("prefix length out of range");
  const MatrixXd X = task.X.topRows(n);
  const VectorXd y = task.y_noisy.head(n);
  if (reg.kind == Regularization::Kind::PerSample) return assemble_system(X, y, reg.value, params);
  return assemble_system_total(X, y, reg.value, params);
}

MatrixXd solver_prefix_predictions(const GpTask& task, const KernelParams& params,
                                   const Regularization& reg, const SolverSetup& setup) {
  const int N = task.n();
  MatrixXd out(N, setup.steps + 1);
  for (int n = 1; n <= N; ++n) {
    const KernelSystem sys = prefix_system(task, n, params, reg);
    SolverTrace trace;
    switch (setup.method) {
      case Method::Richardson:
        trace = richardson_precond_run(sys, setup.eta.value_or(default_eta_richardson(sys)), setup.steps);
        break;
      case Method::ConjugateGradient:
        trace = cg_run(sys, std::max(1, setup.steps), setup.cg_tol);
        break;
      case Method::GradientDescent: {
        const double eta = setup.eta ? *setup.eta : default_gradient_steps(sys).eta;
        trace = gd_run(sys, eta, setup.steps);
        break;
      }
      case Method::Nesterov: {
        const GradientSteps g = default_gradient_steps(sys);
        trace = nesterov_run(sys, setup.eta.value_or(g.eta), setup.beta.value_or(g.beta), setup.steps);
        break;
      }
      case Method::InexactRichardson:
        throw std::invalid_argument("prefix predictions are not defined for the inexact simulator");
    }
    const VectorXd kq = kernel_column(sys.X, task.X.row(n).transpose(), params);
    for (int t = 0; t <= setup.steps; ++t) out(n - 1, t) = kq.dot(trace.at(t));
  }
  return out;
}

VectorXd direct_prefix_predictions(const GpTask& task, const KernelParams& params,
                                   const Regularization& reg) {
  const int N = task.n();
  VectorXd out(N);
  for (int n = 1; n <= N; ++n) {
    const KernelSystem sys = prefix_system(task, n, params, reg);
    const VectorXd kq = kernel_column(sys.X, task.X.row(n).transpose(), params);
    out[n - 1] = kq.dot(solve_krr_direct(sys));
  }
  return out;
}

ConstructionParams prefix_construction(const GpTask& task, int n, const KernelParams& params,
                                       const Regularization& reg, const TransformerSetup& setup) {
  ConstructionParams p;
  p.n = n;
  p.d = static_cast<int>(task.X.cols());
  p.v = params.bandwidth;
  p.lambda0 = reg.lambda0_for(n);
  p.c = setup.c;
  p.eps = setup.eps;
  p.bx = setup.bx;
  p.by = setup.by ? *setup.by : std::max(task.y_noisy.head(n).cwiseAbs().maxCoeff(), 1e-12);
  p.eta = setup.eta ? *setup.eta : default_construction_eta(p.lambda0, p.eps, p.kappa_min());
  return p;
}

MatrixXd transformer_prefix_predictions(const GpTask& task, const KernelParams& params,
                                        const Regularization& reg, const TransformerSetup& setup) {
  const int N = task.n();
  const int pairs = setup.pairs ? *setup.pairs
                                : make_plan(prefix_construction(task, N, params, reg, setup)).L;
  MatrixXd out(N, pairs + 1);
  for (int n = 1; n <= N; ++n) {
    const ConstructionParams p = prefix_construction(task, n, params, reg, setup);
    const ConstructedRun run =
        assemble_and_run(p, task.X.topRows(n + 1), task.y_noisy.head(n), pairs);
    const VectorXd kq = kernel_column(task.X.topRows(n), task.X.row(n).transpose(), params);
    for (int l = 0; l <= pairs; ++l) out(n - 1, l) = kq.dot(run.w_snapshot(l));
  }
  return out;
}

MatrixXd construction_reference_predictions(const GpTask& task, const KernelParams& params,
                                            const Regularization& reg,
                                            const TransformerSetup& setup, int steps) {
  const int N = task.n();
  MatrixXd out(N, steps + 1);
  for (int n = 1; n <= N; ++n) {
    const ConstructionParams p = prefix_construction(task, n, params, reg, setup);
    const KernelSystem sys =
        assemble_system(task.X.topRows(n), task.y_noisy.head(n), p.lambda0, params);
    const SolverTrace trace = richardson_precond_run(sys, p.eta, steps);
    const VectorXd kq = kernel_column(sys.X, task.X.row(n).transpose(), params);
    for (int t = 0; t <= steps; ++t) out(n - 1, t) = kq.dot(trace.at(t));
  }
  return out;
}

ErrorVector prefix_error_vector(const VectorXd& predictions, const VectorXd& labels,
                                const std::string& tag, int task) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("prediction and label lengths differ");
  return ErrorVector{predictions - labels, tag, task};
}

MatrixXd error_matrix(const MatrixXd& predictions, const VectorXd& labels) {
  if (predictions.rows() != labels.size()) throw std::invalid_argument("prediction and label lengths differ");
  return predictions.colwise() - labels;
}

double cosine(const VectorXd& u, const VectorXd& v, bool* zero) {
  if (u.size() != v.size()) throw std::invalid_argument("error vectors differ in length");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    if (zero) *zero = true;
    return 0.0;
  }
  if (zero) *zero = false;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

SimeValue sime(const std::vector<VectorXd>& layer_errors, const std::vector<VectorXd>& step_errors,
               bool skip_zero) {
  if (layer_errors.size() != step_errors.size() || layer_errors.empty()) {
    throw std::invalid_argument("SimE needs the same non-empty task set on both sides");
  }
  SimeValue out;
  double total = 0.0;
  int counted = 0;
  for (std::size_t b = 0; b < layer_errors.size(); ++b) {
    bool zero = false;
    const double c = cosine(layer_errors[b], step_errors[b], &zero);
    if (zero) {
      ++out.zero_vectors;
      if (skip_zero) continue;
    }
    total += c;
    ++counted;
  }
  out.value = counted > 0 ? total / counted : 0.0;
  return out;
}

SimEMatrix sime_matrix(const std::vector<MatrixXd>& layer_errors,
                       const std::vector<MatrixXd>& step_errors, bool skip_zero) {
  if (layer_errors.size() != step_errors.size() || layer_errors.empty()) {
    throw std::invalid_argument("SimE needs the same non-empty task set on both sides");
  }
  const Eigen::Index layers = layer_errors[0].cols();
  const Eigen::Index steps = step_errors[0].cols();
  if (layers < 1 || steps < 1) throw std::invalid_argument("SimE needs at least one layer and one step");
  SimEMatrix m;
  m.batch = static_cast<int>(layer_errors.size());
  m.per_task.assign(layer_errors.size(), MatrixXd::Zero(layers, steps));
  MatrixXd total = MatrixXd::Zero(layers, steps);
  Eigen::MatrixXi counted = Eigen::MatrixXi::Zero(layers, steps);
  for (std::size_t b = 0; b < layer_errors.size(); ++b) {
    if (layer_errors[b].cols() != layers || step_errors[b].cols() != steps) {
      throw std::invalid_argument("ragged layer or step counts across tasks");
    }
    for (Eigen::Index l = 0; l < layers; ++l) {
      for (Eigen::Index t = 0; t < steps; ++t) {
        bool zero = false;
        const double c = cosine(layer_errors[b].col(l), step_errors[b].col(t), &zero);
        m.per_task[b](l, t) = c;
        if (zero) {
          ++m.zero_vectors;
          if (skip_zero) continue;
        }
        total(l, t) += c;
        ++counted(l, t);
      }
    }
  }
  m.mean = MatrixXd::Zero(layers, steps);
  for (Eigen::Index l = 0; l < layers; ++l) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (counted(l, t) > 0) m.mean(l, t) = total(l, t) / counted(l, t);
    }
  }
  return m;
}

namespace {

int row_argmax(const MatrixXd& m, Eigen::Index row) {
  int best = 0;
  for (Eigen::Index t = 1; t < m.cols(); ++t) {
    if (m(row, t) > m(row, best)) best = static_cast<int>(t);
  }
  return best;
}

}  // namespace

ArgmaxTrajectory argmax_trajectory(const SimEMatrix& m, int first, int last) {
  const int layers = static_cast<int>(m.mean.rows());
  if (layers < 1 || m.mean.cols() < 1) throw std::invalid_argument("empty SimE matrix");
  if (last < 0) last = layers - 1;
  if (first < 0 || first > last || last >= layers) throw std::invalid_argument("bad fit range");
  ArgmaxTrajectory tr;
  tr.fit_first = first;
  tr.fit_last = last;
  tr.mean = VectorXd::Zero(layers);
  tr.stddev = VectorXd::Zero(layers);
  tr.grid_argmax.resize(static_cast<std::size_t>(layers));
  const std::vector<MatrixXd>& grids = m.per_task.empty() ? std::vector<MatrixXd>{m.mean} : m.per_task;
  for (int l = 0; l < layers; ++l) {
    tr.grid_argmax[l] = row_argmax(m.mean, l);
    double sum = 0.0;
    double sq = 0.0;
    for (const MatrixXd& g : grids) {
      const double t = row_argmax(g, l);
      sum += t;
      sq += t * t;
    }
    const double count = static_cast<double>(grids.size());
    tr.mean[l] = sum / count;
    tr.stddev[l] = std::sqrt(std::max(0.0, sq / count - tr.mean[l] * tr.mean[l]));
  }

  const int points = last - first + 1;
  tr.degenerate = points < 3;
  double mx = 0.0;
  double my = 0.0;
  for (int l = first; l <= last; ++l) {
    mx += l;
    my += tr.mean[l];
  }
  mx /= points;
  my /= points;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (int l = first; l <= last; ++l) {
    sxx += (l - mx) * (l - mx);
    sxy += (l - mx) * (tr.mean[l] - my);
    syy += (tr.mean[l] - my) * (tr.mean[l] - my);
  }
  tr.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  tr.intercept = my - tr.slope * mx;
  if (tr.degenerate) {
    tr.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (int l = first; l <= last; ++l) {
      const double r = tr.mean[l] - (tr.intercept + tr.slope * l);
      ss_res += r * r;
    }
    tr.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  }
  return tr;
}

std::vector<MseRow> mse_curves(const std::vector<MatrixXd>& predictions,
                               const std::vector<GpTask>& tasks,
                               const std::vector<int>& context_lengths) {
  if (predictions.size() != tasks.size() || tasks.empty()) {
    throw std::invalid_argument("one prediction table per task is required");
  }
  const Eigen::Index curves = predictions[0].cols();
  std::vector<MseRow> rows;
  for (Eigen::Index c = 0; c < curves; ++c) {
    for (int n : context_lengths) {
      double total = 0.0;
      for (std::size_t b = 0; b < tasks.size(); ++b) {
        if (n < 1 || n > tasks[b].n() || predictions[b].rows() < n || predictions[b].cols() != curves) {
          throw std::invalid_argument("context length outside the prediction table");
        }
        const double e = predictions[b](n - 1, c) - tasks[b].f_values[n];
        total += e * e;
      }
      rows.push_back(MseRow{static_cast<int>(c), n, total / static_cast<double>(tasks.size())});
    }
  }
  return rows;
}

std::vector<NoiseSweepRow> noise_sweep(const NoiseSweepSetup& setup) {
  if (setup.l_finite < 1) throw std::invalid_argument("L_finite must be at least 1");
  if (setup.tasks_per_level < 1) throw std::invalid_argument("need at least one task per level");
  const KernelParams params(setup.bandwidth);
  const double lam_train = setup.sigma_train * setup.sigma_train;
  std::vector<NoiseSweepRow> rows;
  for (std::size_t level = 0; level < setup.sigma_test.size(); ++level) {
    const double sigma = setup.sigma_test[level];
    const std::vector<GpTask> batch = make_batch(setup.spec, setup.n, params, sigma,
                                                 setup.tasks_per_level, derive_seed(setup.seed, level));
    std::vector<double> se_finite(batch.size()), se_encoded(batch.size()), se_bayes(batch.size());
    parallel_for(static_cast<int>(batch.size()), [&](int b) {
      const GpTask& task = batch[b];
      const KernelSystem train = prefix_system(task, setup.n, params, Regularization::total(lam_train));
      const KernelSystem bayes = prefix_system(task, setup.n, params, Regularization::total(sigma * sigma));
      const VectorXd xq = task.X.row(setup.n).transpose();
      const double target = task.query_target();
      const SolverTrace tr = richardson_precond_run(train, default_eta_richardson(train), setup.l_finite);
      const double p_finite = predict(train, tr.iterates.back(), xq);
      const double p_encoded = predict(train, solve_krr_direct(train), xq);
      const double p_bayes = predict(bayes, solve_krr_direct(bayes), xq);
      se_finite[b] = (p_finite - target) * (p_finite - target);
      se_encoded[b] = (p_encoded - target) * (p_encoded - target);
      se_bayes[b] = (p_bayes - target) * (p_bayes - target);
    });
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const double m_bayes = mean(se_bayes);
    const std::string dist = distribution_name(setup.spec.kind);
    rows.push_back({dist, sigma, "finite_l", mean(se_finite), mean(se_finite) / m_bayes});
    rows.push_back({dist, sigma, "encoded", mean(se_encoded), mean(se_encoded) / m_bayes});
    rows.push_back({dist, sigma, "bayes", m_bayes, 1.0});
  }
  return rows;
}

}  // namespace krrtf

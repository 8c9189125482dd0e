#include "krrtf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "krrtf/analysis.hpp"
#include "krrtf/construct.hpp"
#include "krrtf/parallel.hpp"
#include "krrtf/tasks.hpp"

namespace krrtf {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

void write_json(const ExperimentConfig& cfg, const std::string& name, const json& j) {
  write_text(out_path(cfg, name), j.dump(2) + "\n");
}

std::vector<GpTask> config_batch(const ExperimentConfig& cfg) {
  return make_batch(cfg.distribution_spec(), cfg.n, KernelParams(cfg.bandwidth), cfg.sigma_noise,
                    cfg.batch, cfg.seed);
}

TransformerSetup transformer_setup(const ExperimentConfig& cfg) {
  TransformerSetup s;
  s.c = cfg.c;
  s.eps = cfg.eps;
  s.bx = cfg.input_bound();
  s.by = cfg.b_y;
  s.eta = cfg.eta;
  s.pairs = cfg.iterations;
  return s;
}

void check_depth(const ExperimentConfig& cfg, int pairs) {
  if (pairs > cfg.max_iterations) {
    throw ConfigError("construction needs " + std::to_string(pairs) +
                      " iteration pairs, above max_iterations = " + std::to_string(cfg.max_iterations));
  }
}

double batch_label_bound(const std::vector<GpTask>& batch) {
  double by = 1e-12;
  for (const GpTask& t : batch) by = std::max(by, t.y_noisy.cwiseAbs().maxCoeff());
  return by;
}

json sime_summary(const SimEMatrix& m, const ArgmaxTrajectory& tr) {
  return json{{"slope", tr.slope},         {"intercept", tr.intercept}, {"r2", tr.r2},
              {"fit_first", tr.fit_first}, {"fit_last", tr.fit_last},   {"degenerate", tr.degenerate},
              {"batch", m.batch},          {"zero_vectors", m.zero_vectors}};
}

void write_sime(const ExperimentConfig& cfg, const std::string& tag, const SimEMatrix& m,
                const ArgmaxTrajectory& tr) {
  const std::string hash = cfg.hash();
  CsvWriter s(hash, {"layer", "step", "value"});
  for (Eigen::Index l = 0; l < m.mean.rows(); ++l) {
    for (Eigen::Index t = 0; t < m.mean.cols(); ++t) {
      s.cell(static_cast<int>(l)).cell(static_cast<int>(t)).cell(m.mean(l, t));
      s.end_row();
    }
  }
  write_text(out_path(cfg, "sime_" + tag + ".csv"), s.str());
  CsvWriter a(hash, {"layer", "mean", "std", "grid_argmax"});
  for (Eigen::Index l = 0; l < tr.mean.size(); ++l) {
    a.cell(static_cast<int>(l)).cell(tr.mean[l]).cell(tr.stddev[l]).cell(tr.grid_argmax[l]);
    a.end_row();
  }
  write_text(out_path(cfg, "argmax_" + tag + ".csv"), a.str());
}

}  // namespace

int cmd_gen_tasks(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<GpTask> batch = config_batch(cfg);
  const std::string hash = cfg.hash();
  write_text(out_path(cfg, "tasks.csv"), task_batch_csv(batch, hash));
  json tasks = json::array();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    tasks.push_back({{"task", b}, {"seed", batch[b].seed}, {"clipped", batch[b].clipped}});
  }
  json config = cfg.to_json();
  config.erase("out");
  write_json(cfg, "tasks_manifest.json", {{"config_hash", hash}, {"config", config}, {"tasks", tasks}});
  return kExitOk;
}

int cmd_plan(const ExperimentConfig& cfg, bool weights) {
  cfg.validate();
  const Regularization reg = cfg.regularization();
  ConstructionParams p;
  p.n = cfg.n;
  p.d = cfg.d;
  p.v = cfg.bandwidth;
  p.lambda0 = reg.lambda0_for(cfg.n);
  p.c = cfg.c;
  p.eps = cfg.eps;
  p.bx = cfg.input_bound();
  p.by = cfg.b_y ? *cfg.b_y : batch_label_bound(config_batch(cfg));
  p.eta = cfg.eta ? *cfg.eta : default_construction_eta(p.lambda0, p.eps, p.kappa_min());
  const ConstructionPlan plan = make_plan(p);
  const int pairs = cfg.iterations.value_or(plan.L);
  json j = plan_to_json(p, plan);
  j["config_hash"] = cfg.hash();
  j["iterations"] = pairs;
  j["b_y_source"] = cfg.b_y ? "config" : "batch";
  write_json(cfg, "plan.json", j);
  if (weights) {
    check_depth(cfg, pairs);
    json w = transformer_to_json(assemble(p, plan, pairs));
    w["config_hash"] = cfg.hash();
    write_text(out_path(cfg, "weights.json"), w.dump() + "\n");
  }
  return kExitOk;
}

int cmd_construct_check(const ExperimentConfig& cfg, bool strict) {
  cfg.validate();
  const std::vector<GpTask> batch = config_batch(cfg);
  const KernelParams params(cfg.bandwidth);
  const Regularization reg = cfg.regularization();
  const TransformerSetup setup = transformer_setup(cfg);
  const int N = cfg.n;

  std::vector<ConstructionParams> cp(batch.size());
  std::vector<ConstructionPlan> plans(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    cp[b] = prefix_construction(batch[b], N, params, reg, setup);
    plans[b] = make_plan(cp[b]);
    check_depth(cfg, cfg.iterations.value_or(plans[b].L));
  }

  std::vector<double> readout(batch.size()), krr(batch.size());
  parallel_for(static_cast<int>(batch.size()), [&](int b) {
    const GpTask& task = batch[b];
    const ConstructedRun run =
        assemble_and_run(cp[b], task.X, task.y_noisy, cfg.iterations.value_or(-1));
    const KernelSystem sys = assemble_system(task.X.topRows(N), task.y_noisy, cp[b].lambda0, params);
    readout[b] = run.prediction;
    krr[b] = predict(sys, solve_krr_direct(sys), task.X.row(N).transpose());
  });

  CsvWriter w(cfg.hash(), {"task", "L", "readout", "krr", "abs_error", "bound", "status"});
  double max_error = 0.0;
  double max_ratio = 0.0;
  int failures = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double err = std::abs(readout[b] - krr[b]);
    const double bound = plans[b].c_sys * plans[b].eps;
    const bool ok = err <= bound;
    failures += ok ? 0 : 1;
    max_error = std::max(max_error, err);
    max_ratio = std::max(max_ratio, err / bound);
    w.cell(static_cast<int>(b)).cell(cfg.iterations.value_or(plans[b].L)).cell(readout[b]).cell(krr[b]);
    w.cell(err).cell(bound).cell(std::string(ok ? "PASS" : "FAIL"));
    w.end_row();
  }
  write_text(out_path(cfg, "construct_check.csv"), w.str());
  const bool pass = failures == 0;
  write_json(cfg, "construct_check.json",
             {{"config_hash", cfg.hash()},
              {"tasks", batch.size()},
              {"failures", failures},
              {"max_abs_error", max_error},
              {"max_error_over_bound", max_ratio},
              {"status", pass ? "PASS" : "FAIL"}});
  std::cout << "construct-check " << (pass ? "PASS" : "FAIL") << " max |readout - krr| = "
            << format_double(max_error) << " (" << failures << " of " << batch.size()
            << " above C_sys*eps)\n";
  return (!pass && strict) ? kExitCheckFailed : kExitOk;
}

int cmd_solve(const ExperimentConfig& cfg, Method method) {
  cfg.validate();
  const std::vector<GpTask> batch = config_batch(cfg);
  const KernelParams params(cfg.bandwidth);
  const Regularization reg = cfg.regularization();
  const int N = cfg.n;
  int T = 0;
  switch (method) {
    case Method::Richardson:
    case Method::InexactRichardson: T = cfg.steps.richardson; break;
    case Method::ConjugateGradient: T = cfg.steps.cg; break;
    case Method::GradientDescent: T = cfg.steps.gd; break;
    case Method::Nesterov: T = cfg.steps.nesterov; break;
  }

  std::vector<SolverTrace> traces(batch.size());
  std::vector<KernelSystem> systems(batch.size());
  parallel_for(static_cast<int>(batch.size()), [&](int b) {
    systems[b] = prefix_system(batch[b], N, params, reg);
    const KernelSystem& sys = systems[b];
    switch (method) {
      case Method::Richardson:
        traces[b] = richardson_precond_run(sys, cfg.eta.value_or(default_eta_richardson(sys)), T);
        break;
      case Method::ConjugateGradient: traces[b] = cg_run(sys, T, cfg.cg_tol); break;
      case Method::GradientDescent:
        traces[b] = gd_run(sys, cfg.eta.value_or(default_gradient_steps(sys).eta), T);
        break;
      case Method::Nesterov: {
        const GradientSteps g = default_gradient_steps(sys);
        traces[b] = nesterov_run(sys, cfg.eta.value_or(g.eta), g.beta, T);
        break;
      }
      case Method::InexactRichardson: {
        const double lambda0 = sys.lambda0;
        const double kappa = compute_kappa_min(cfg.input_bound(), params);
        PerturbationSpec pert;
        pert.eps_flip = pert.eps_sq = pert.eps_sq_tilde = cfg.eps;
        pert.mode = PerturbationMode::AdversarialSign;
        pert.seed = batch[b].seed;
        traces[b] = inexact_richardson_run(
            sys, cfg.eta.value_or(default_construction_eta(lambda0, cfg.eps, kappa)), T, pert);
        break;
      }
    }
  });

  CsvWriter w(cfg.hash(), {"task", "step", "prediction", "target", "residual"});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const KernelSystem& sys = systems[b];
    const VectorXd kq = kernel_column(sys.X, batch[b].X.row(N).transpose(), params);
    const MatrixXd A = sys.regularized();
    for (int t = 0; t <= T; ++t) {
      const VectorXd& wt = traces[b].at(t);
      w.cell(static_cast<int>(b)).cell(t).cell(kq.dot(wt)).cell(batch[b].query_target());
      w.cell((A * wt - sys.y).norm());
      w.end_row();
    }
  }
  write_text(out_path(cfg, "trace_" + method_name(method) + ".csv"), w.str());
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<GpTask> batch = config_batch(cfg);
  const KernelParams params(cfg.bandwidth);
  const Regularization reg = cfg.regularization();
  const int count = static_cast<int>(batch.size());
  const std::vector<int> lengths = cfg.resolved_context_lengths();

  struct Curves {
    std::string name;
    SolverSetup setup;
    std::vector<MatrixXd> predictions;
    std::vector<MatrixXd> errors;
  };
  std::vector<Curves> solvers(4);
  solvers[0].setup = {Method::Richardson, cfg.steps.richardson, cfg.cg_tol, cfg.eta, std::nullopt};
  solvers[1].setup = {Method::ConjugateGradient, cfg.steps.cg, cfg.cg_tol, std::nullopt, std::nullopt};
  solvers[2].setup = {Method::GradientDescent, cfg.steps.gd, cfg.cg_tol, std::nullopt, std::nullopt};
  solvers[3].setup = {Method::Nesterov, cfg.steps.nesterov, cfg.cg_tol, std::nullopt, std::nullopt};
  for (Curves& c : solvers) {
    c.name = method_name(c.setup.method);
    c.predictions.resize(batch.size());
    c.errors.resize(batch.size());
  }
  std::vector<MatrixXd> direct(batch.size());
  parallel_for(count, [&](int b) {
    const VectorXd labels = batch[b].next_labels();
    for (Curves& c : solvers) {
      c.predictions[b] = solver_prefix_predictions(batch[b], params, reg, c.setup);
      c.errors[b] = error_matrix(c.predictions[b], labels);
    }
    direct[b] = direct_prefix_predictions(batch[b], params, reg);
  });

  const std::string hash = cfg.hash();
  json summary = {{"config_hash", hash}, {"batch", count}, {"sime", json::object()}};
  for (std::size_t i = 1; i < solvers.size(); ++i) {
    const SimEMatrix m = sime_matrix(solvers[i].errors, solvers[0].errors);
    const ArgmaxTrajectory tr = argmax_trajectory(m);
    write_sime(cfg, solvers[i].name, m, tr);
    summary["sime"][solvers[i].name] = sime_summary(m, tr);
  }

  std::vector<std::pair<std::string, std::vector<MatrixXd>>> curves;
  curves.emplace_back("direct", direct);
  for (const Curves& c : solvers) curves.emplace_back(c.name, c.predictions);

  if (cfg.transformer) {
    const TransformerSetup setup = transformer_setup(cfg);
    int pairs = 0;
    for (const GpTask& task : batch) {
      const int p = setup.pairs.value_or(make_plan(prefix_construction(task, cfg.n, params, reg, setup)).L);
      check_depth(cfg, p);
      pairs = std::max(pairs, p);
    }
    TransformerSetup fixed = setup;
    fixed.pairs = pairs;
    std::vector<MatrixXd> layer_pred(batch.size()), layer_err(batch.size()), ref_err(batch.size());
    parallel_for(count, [&](int b) {
      const VectorXd labels = batch[b].next_labels();
      layer_pred[b] = transformer_prefix_predictions(batch[b], params, reg, fixed);
      layer_err[b] = error_matrix(layer_pred[b], labels);
      ref_err[b] = error_matrix(
          construction_reference_predictions(batch[b], params, reg, fixed, 2 * pairs), labels);
    });
    const SimEMatrix m = sime_matrix(layer_err, ref_err);
    const ArgmaxTrajectory tr = argmax_trajectory(m);
    write_sime(cfg, "transformer", m, tr);
    summary["sime"]["transformer"] = sime_summary(m, tr);
    summary["transformer_pairs"] = pairs;
    curves.emplace_back("transformer", layer_pred);
  }

  CsvWriter w(hash, {"method", "curve", "n", "mse"});
  for (const auto& [name, preds] : curves) {
    for (const MseRow& r : mse_curves(preds, batch, lengths)) {
      w.cell(name).cell(r.curve).cell(r.n).cell(r.mse);
      w.end_row();
    }
  }
  write_text(out_path(cfg, "mse_curves.csv"), w.str());
  write_json(cfg, "compare_summary.json", summary);
  return kExitOk;
}

int cmd_noise_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  for (double s : cfg.sigma_test) {
    if (!(s > 0.0)) throw ConfigError("sigma_test levels must be positive");
  }
  if (!(cfg.sigma_train > 0.0)) throw ConfigError("sigma_train must be positive");
  const std::string hash = cfg.hash();
  CsvWriter w(hash, {"distribution", "sigma_test", "predictor", "mse", "ratio"});
  json rows = json::array();
  for (std::size_t i = 0; i < cfg.sweep_distributions.size(); ++i) {
    NoiseSweepSetup s;
    s.spec = cfg.distribution_spec();
    s.spec.kind = parse_distribution(cfg.sweep_distributions[i]);
    s.n = cfg.n;
    s.bandwidth = cfg.bandwidth;
    s.sigma_train = cfg.sigma_train;
    s.sigma_test = cfg.sigma_test;
    s.l_finite = cfg.l_finite;
    s.tasks_per_level = cfg.batch;
    s.seed = derive_seed(cfg.seed, i);
    for (const NoiseSweepRow& r : noise_sweep(s)) {
      w.cell(r.distribution).cell(r.sigma_test).cell(r.predictor).cell(r.mse).cell(r.ratio);
      w.end_row();
      rows.push_back({{"distribution", r.distribution},
                      {"sigma_test", r.sigma_test},
                      {"predictor", r.predictor},
                      {"mse", r.mse},
                      {"ratio", r.ratio}});
    }
  }
  write_text(out_path(cfg, "noise_sweep.csv"), w.str());
  write_json(cfg, "noise_sweep.json", {{"config_hash", hash}, {"rows", rows}});
  return kExitOk;
}

}  // namespace krrtf

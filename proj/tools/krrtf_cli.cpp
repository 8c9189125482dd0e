#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "krrtf/commands.hpp"

using namespace krrtf;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> n;
  std::optional<int> d;
  std::optional<int> batch;
  std::optional<std::string> distribution;
  std::optional<double> bandwidth;
  std::optional<double> lambda0;
  std::optional<double> lambda;
  std::optional<double> eta;
  std::optional<double> c;
  std::optional<double> eps;
  std::optional<int> iterations;
  bool transformer = false;

  void apply(ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (n) cfg.n = *n;
    if (d) cfg.d = *d;
    if (batch) cfg.batch = *batch;
    if (distribution) cfg.distribution = *distribution;
    if (bandwidth) cfg.bandwidth = *bandwidth;
    if (lambda0) {
      cfg.lambda0 = *lambda0;
      cfg.lambda.reset();
    }
    if (lambda) {
      cfg.lambda = *lambda;
      cfg.lambda0.reset();
    }
    if (eta) cfg.eta = *eta;
    if (c) cfg.c = *c;
    if (eps) cfg.eps = *eps;
    if (iterations) cfg.iterations = *iterations;
    if (transformer) cfg.transformer = true;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel ridge regression solvers and an explicit transformer that runs them"};
  app.require_subcommand(1);

  std::string config_path;
  bool strict = false;
  Overrides ov;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", ov.seed, "master seed");
  app.add_option("--out", ov.out, "output directory");
  app.add_flag("--strict", strict, "exit 1 when a check fails");
  app.add_option("--n", ov.n, "context length N");
  app.add_option("--d", ov.d, "input dimension");
  app.add_option("--batch", ov.batch, "tasks per batch");
  app.add_option("--distribution", ov.distribution, "uniform, gaussian or spherical");
  app.add_option("--bandwidth", ov.bandwidth, "kernel bandwidth v");
  app.add_option("--lambda0", ov.lambda0, "per-sample ridge lambda0");
  app.add_option("--lambda", ov.lambda, "total ridge lambda");
  app.add_option("--eta", ov.eta, "step size");
  app.add_option("--c", ov.c, "contraction margin c");
  app.add_option("--eps", ov.eps, "approximation level eps");
  app.add_option("--iterations", ov.iterations, "iteration pairs L");
  app.add_flag("--transformer", ov.transformer, "include the constructed transformer");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-tasks", "sample a task batch");
  bool weights = false;
  auto* plan = app.add_subcommand("plan", "size the construction");
  plan->add_flag("--weights", weights, "also write every weight matrix");
  auto* check = app.add_subcommand("construct-check", "run the construction against direct KRR");
  std::string method = "richardson";
  auto* solve = app.add_subcommand("solve", "run one solver on the batch");
  solve->add_option("--method", method, "richardson, cg, gd, nesterov or inexact_richardson")->required();
  auto* compare = app.add_subcommand("compare", "SimE, argmax and MSE curves");
  auto* sweep = app.add_subcommand("noise-sweep", "train/test noise mismatch table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    ov.apply(cfg);
    cfg.validate();
    if (*gen) return cmd_gen_tasks(cfg);
    if (*plan) return cmd_plan(cfg, weights);
    if (*check) return cmd_construct_check(cfg, strict);
    if (*solve) return cmd_solve(cfg, parse_method(method));
    if (*compare) return cmd_compare(cfg);
    if (*sweep) return cmd_noise_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

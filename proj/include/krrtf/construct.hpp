#pragma once

#include <vector>

#include "krrtf/bounds.hpp"
#include "krrtf/kernel.hpp"
#include "krrtf/spline.hpp"
#include "krrtf/transformer.hpp"

namespace krrtf {

// Zero-based token rows for input dimension d.
struct RowMap {
  int d = 0;
  int y = 0;
  int w = 0;
  int sqnorm = 0;
  int k = 0;
  int alpha = 0;
  int beta = 0;
  int p = 0;
  int khat = 0;
  int s = 0;
  int t = 0;
  int bias = 0;
  int dim = 0;

  static RowMap for_dim(int d);
};

struct ConstructionParams {
  double lambda0 = 1.0;
  double eta = 0.0;
  double v = 1.0;
  double c = 0.5;
  double eps = 0.05;
  double bx = 1.0;
  double by = 1.0;
  int n = 1;
  int d = 1;

  bounds::Inputs bound_inputs() const;
  double kappa_min() const;
};

// 0.99 / (lambda0 eps + 1 + lambda0 / kappa_min)
double default_construction_eta(double lambda0, double eps, double kappa_min);

struct ConstructionPlan {
  int L = 0;
  int n_flip = 0;
  int n_sq = 0;
  int n_sq_tilde = 0;
  int n_inv = 0;
  int n_sq_hat = 0;
  int width = 0;
  int block_count = 0;
  double kappa_min = 0.0;
  double rate = 0.0;
  double b_alpha = 0.0;
  double b_w = 0.0;
  double b_w_tilde = 0.0;
  double c_sys = 0.0;
  double eps = 0.0;
  double flip_delta = 0.0;
  double sq_delta = 0.0;
  double sq_tilde_delta = 0.0;
  double inv_delta = 0.0;
  double sq_hat_delta = 0.0;
};

ConstructionPlan make_plan(const ConstructionParams& params);

struct PromptEncoding {
  TokenMatrix Z;
  RowMap rows;
  int n = 0;
  int d = 0;
};

// X holds N + 1 points (last one is the query), y holds N labels.
PromptEncoding encode_prompt(const MatrixXd& X, const VectorXd& y, const ConstructionParams& params);

std::vector<Block> build_readin(const ConstructionParams& params, const ConstructionPlan& plan);
std::vector<Block> build_iteration_pair(const ConstructionParams& params, const ConstructionPlan& plan);
std::vector<Block> build_readout(const ConstructionParams& params, const ConstructionPlan& plan);

// Read-in, `iterations` copies of the iteration pair (plan.L when negative), read-out.
Transformer assemble(const ConstructionParams& params, const ConstructionPlan& plan,
                     int iterations = -1);

struct ConstructedRun {
  ConstructionPlan plan;
  PromptEncoding prompt;
  int iterations = 0;
  double prediction = 0.0;
  std::vector<Capture> captures;

  // Context-token w row after `pair` iteration pairs (0 = after read-in).
  VectorXd w_snapshot(int pair) const;
  const TokenMatrix& after_block(int block) const;
};

ConstructedRun assemble_and_run(const ConstructionParams& params, const MatrixXd& X,
                                const VectorXd& y, int iterations = -1);

// Index of the block that closes iteration pair `pair` (1-based pairs).
int pair_block_index(int pair);

}  // namespace krrtf

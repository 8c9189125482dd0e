#include "krrtf/construct.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace krrtf {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Collects hidden units of one MLP layer.
class MlpBuilder {
 public:
  explicit MlpBuilder(int dim) : dim_(dim) {}

  // Unit ReLU(sum_j in_j z[row_j]) with output weights out_j into row_j.
  int add_unit(std::initializer_list<std::pair<int, double>> in,
               std::initializer_list<std::pair<int, double>> out) {
    for (const auto& [row, value] : in) {
      if (value != 0.0) w_in_.emplace_back(units_, row, value);
    }
    for (const auto& [row, value] : out) {
      if (value != 0.0) w_out_.emplace_back(row, units_, value);
    }
    return units_++;
  }

  // Units of `net` applied to sum_j scale_j z[row_j], written to out_row times out_scale.
  void add_spline(const SplineNet& net, std::initializer_list<std::pair<int, double>> input,
                  int bias_row, int out_row, double out_scale) {
    for (const ReluUnit& u : net.units) {
      for (const auto& [row, scale] : input) {
        if (u.a * scale != 0.0) w_in_.emplace_back(units_, row, u.a * scale);
      }
      if (u.b != 0.0) w_in_.emplace_back(units_, bias_row, u.b);
      if (u.c * out_scale != 0.0) w_out_.emplace_back(out_row, units_, u.c * out_scale);
      ++units_;
    }
  }

  std::shared_ptr<const MlpWeights> build() const {
    SparseRows w_in(units_, dim_);
    SparseRows w_out(dim_, units_);
    w_in.setFromTriplets(w_in_.begin(), w_in_.end());
    w_out.setFromTriplets(w_out_.begin(), w_out_.end());
    return std::make_shared<const MlpWeights>(std::move(w_in), std::move(w_out));
  }

 private:
  int dim_;
  int units_ = 0;
  Triplets w_in_;
  Triplets w_out_;
};

// Query/key pair whose inner product is -||x_i - x_j||^2 / (2 v^2).
// With `dummy_aware` the -1/2 entries are switched off for the dummy token (s = 1).
void distance_scores(const RowMap& r, double v, bool dummy_aware, MatrixXd& Q, MatrixXd& K) {
  Q = MatrixXd::Zero(r.dim, r.dim);
  K = MatrixXd::Zero(r.dim, r.dim);
  for (int i = 0; i < r.d; ++i) {
    Q(i, i) = 1.0 / v;
    K(i, i) = 1.0 / v;
  }
  Q(r.d, r.sqnorm) = 1.0 / v;
  Q(r.d + 1, r.bias) = -0.5 / v;
  K(r.d, r.bias) = -0.5 / v;
  K(r.d + 1, r.sqnorm) = 1.0 / v;
  if (dummy_aware) {
    Q(r.d + 1, r.s) = 0.5 / v;
    K(r.d, r.s) = 0.5 / v;
  }
}

MaskMatrix mask_columns(int n, std::initializer_list<int> columns) {
  MaskMatrix m = MaskMatrix::Constant(n + 2, n + 2, false);
  for (int j : columns) m.col(j).setConstant(true);
  return m;
}

void check_params(const ConstructionParams& p) {
  if (p.n < 1 || p.d < 1) throw std::invalid_argument("construction needs N >= 1 and d >= 1");
  if (!(p.lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
  if (!(p.v > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(p.c > 0.0 && p.c < 1.0)) throw std::invalid_argument("c must lie in (0, 1)");
  if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(p.eps < p.c)) throw std::invalid_argument("eps must be smaller than c");
  if (!(p.bx >= 0.0)) throw std::invalid_argument("B_x must be non-negative");
  if (!(p.by > 0.0)) throw std::invalid_argument("B_y must be positive");
}

}  // namespace

RowMap RowMap::for_dim(int d) {
  RowMap r;
  r.d = d;
  r.y = d;
  r.w = d + 1;
  r.sqnorm = d + 2;
  r.k = d + 3;
  r.alpha = d + 4;
  r.beta = d + 5;
  r.p = d + 6;
  r.khat = d + 7;
  r.s = d + 8;
  r.t = d + 9;
  r.bias = d + 10;
  r.dim = d + 11;
  return r;
}

bounds::Inputs ConstructionParams::bound_inputs() const {
  return bounds::Inputs{lambda0, by, kappa_min()};
}

double ConstructionParams::kappa_min() const { return compute_kappa_min(bx, KernelParams(v)); }

double default_construction_eta(double lambda0, double eps, double kappa_min) {
  return 0.99 / (lambda0 * eps + 1.0 + lambda0 / kappa_min);
}

ConstructionPlan make_plan(const ConstructionParams& params) {
  check_params(params);
  const bounds::Inputs in = params.bound_inputs();
  const double limit = bounds::eta_limit(in, params.eps);
  if (!(params.eta > 0.0 && params.eta < limit)) {
    throw std::invalid_argument("eta violates 0 < eta < 1/(lambda0 eps + 1 + lambda0/kappa_min) = " +
                                std::to_string(limit));
  }
  const double N = static_cast<double>(params.n);
  ConstructionPlan plan;
  plan.eps = params.eps;
  plan.kappa_min = in.kappa_min;
  plan.rate = 1.0 - params.eta * params.lambda0 * (1.0 - params.c);
  plan.L = ceil_count(std::log(1.0 / params.eps) / std::log(1.0 / plan.rate));
  plan.b_alpha = 1.0 / (N * in.kappa_min) + 1.0 / N;
  plan.b_w = bounds::entrywise_bound(in, params.c, params.n);
  plan.b_w_tilde = bounds::entrywise_bound_tilde(in, params.c);
  plan.c_sys = bounds::system_constant(in, params.c);

  plan.flip_delta = 1.0 / (1.0 + N * in.kappa_min);
  plan.sq_delta = params.by + plan.b_alpha;
  plan.sq_tilde_delta = plan.b_w + plan.b_alpha;
  plan.inv_delta = 1.0 / (N + 1.0);
  plan.sq_hat_delta = plan.b_w + 3.0;

  plan.n_flip = flip_width(plan.flip_delta, params.eps / N);
  plan.n_sq = square_width(plan.sq_delta, params.eps / N);
  plan.n_sq_tilde = square_width(plan.sq_tilde_delta, params.eps / (N * N));
  plan.n_inv = inv_width(plan.inv_delta, params.eps);
  plan.n_sq_hat = square_width(plan.sq_hat_delta, params.eps / N);
  plan.width = std::max({plan.n_flip, 2 * plan.n_sq, 2 * plan.n_sq_tilde + 4, plan.n_inv,
                         2 * plan.n_sq_hat, 2});
  plan.block_count = 2 * plan.L + 5;
  return plan;
}

PromptEncoding encode_prompt(const MatrixXd& X, const VectorXd& y, const ConstructionParams& params) {
  check_params(params);
  if (X.rows() != params.n + 1 || X.cols() != params.d) {
    throw std::invalid_argument("prompt inputs must be (N+1) x d");
  }
  if (y.size() != params.n) throw std::invalid_argument("prompt needs N labels");
  const double tol = 1e-12;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (X.row(i).norm() > params.bx * (1.0 + tol) + tol) {
      throw std::invalid_argument("input norm exceeds B_x at token " + std::to_string(i + 1));
    }
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) > params.by * (1.0 + tol)) {
      throw std::invalid_argument("label exceeds B_y at token " + std::to_string(i + 1));
    }
  }
  PromptEncoding enc;
  enc.rows = RowMap::for_dim(params.d);
  enc.n = params.n;
  enc.d = params.d;
  const RowMap& r = enc.rows;
  enc.Z = TokenMatrix::Zero(r.dim, params.n + 2);
  for (int j = 1; j <= params.n + 1; ++j) {
    enc.Z.block(0, j, params.d, 1) = X.row(j - 1).transpose();
    enc.Z(r.sqnorm, j) = X.row(j - 1).squaredNorm();
  }
  for (int j = 1; j <= params.n; ++j) enc.Z(r.y, j) = y[j - 1];
  enc.Z(r.s, 0) = 1.0;
  enc.Z(r.t, params.n + 1) = 1.0;
  enc.Z.row(r.bias).setOnes();
  return enc;
}

std::vector<Block> build_readin(const ConstructionParams& params, const ConstructionPlan& plan) {
  const RowMap r = RowMap::for_dim(params.d);
  const double N = static_cast<double>(params.n);

  auto attn = std::make_shared<AttentionWeights>();
  distance_scores(r, params.v, true, attn->query, attn->key);
  attn->value = MatrixXd::Zero(r.dim, r.dim);
  attn->value(r.k, r.s) = 1.0;
  attn->excluded = mask_columns(params.n, {params.n + 1});

  MlpBuilder flip(r.dim);
  flip.add_spline(approx_flip(plan.flip_delta, params.eps / N), {{r.k, 1.0}}, r.bias, r.alpha, 1.0);

  MlpBuilder gate(r.dim);
  gate.add_unit({{r.alpha, -1.0}, {r.bias, -plan.b_alpha}, {r.t, plan.b_alpha}}, {{r.alpha, 1.0}});
  gate.add_unit({{r.alpha, 1.0}, {r.bias, -plan.b_alpha}, {r.t, plan.b_alpha}}, {{r.alpha, -1.0}});

  const SplineNet sq = approx_square(plan.sq_delta, params.eps / N);
  MlpBuilder product(r.dim);
  product.add_spline(sq, {{r.y, 1.0}, {r.alpha, 1.0}}, r.bias, r.beta, params.eta / 4.0);
  product.add_spline(sq, {{r.y, 1.0}, {r.alpha, -1.0}}, r.bias, r.beta, -params.eta / 4.0);

  return {Block{attn, flip.build(), "read-in: k and alpha", false},
          Block{nullptr, gate.build(), "read-in: clear test alpha", false},
          Block{nullptr, product.build(), "read-in: beta", false}};
}

std::vector<Block> build_iteration_pair(const ConstructionParams& params, const ConstructionPlan& plan) {
  const RowMap r = RowMap::for_dim(params.d);
  const double N = static_cast<double>(params.n);
  const double lambda = params.lambda0 * N;
  const double eta = params.eta;

  auto attn = std::make_shared<AttentionWeights>();
  distance_scores(r, params.v, false, attn->query, attn->key);
  attn->value = MatrixXd::Zero(r.dim, r.dim);
  attn->value(r.p, r.w) = -1.0;
  attn->excluded = mask_columns(params.n, {0, params.n + 1});

  MlpBuilder gate(r.dim);
  gate.add_unit({{r.p, -1.0}, {r.bias, -plan.b_w}, {r.t, plan.b_w}}, {{r.p, 1.0}});
  gate.add_unit({{r.p, 1.0}, {r.bias, -plan.b_w}, {r.t, plan.b_w}}, {{r.p, -1.0}});

  const SplineNet sq = approx_square(plan.sq_tilde_delta, params.eps / (N * N));
  MlpBuilder update(r.dim);
  update.add_spline(sq, {{r.w, 1.0}, {r.alpha, 1.0}}, r.bias, r.w, -eta * lambda / 4.0);
  update.add_spline(sq, {{r.w, 1.0}, {r.alpha, -1.0}}, r.bias, r.w, eta * lambda / 4.0);
  update.add_unit({{r.beta, 1.0}}, {{r.w, 1.0}});
  update.add_unit({{r.beta, -1.0}}, {{r.w, -1.0}});
  update.add_unit({{r.p, 1.0}}, {{r.w, eta}, {r.p, -1.0}});
  update.add_unit({{r.p, -1.0}}, {{r.w, -eta}, {r.p, 1.0}});

  return {Block{attn, gate.build(), "iteration: p", false},
          Block{nullptr, update.build(), "iteration: w update", false}};
}

std::vector<Block> build_readout(const ConstructionParams& params, const ConstructionPlan& plan) {
  const RowMap r = RowMap::for_dim(params.d);
  const double N = static_cast<double>(params.n);
  const SplineNet inv = approx_inv(plan.inv_delta, params.eps);

  auto attn = std::make_shared<AttentionWeights>();
  distance_scores(r, params.v, false, attn->query, attn->key);
  attn->value = MatrixXd::Zero(r.dim, r.dim);
  attn->value(r.p, r.w) = 1.0;
  // Attention weights sum to one, so the bias row carries the spline's constant term.
  attn->value(r.khat, r.bias) = inv.d0;
  attn->excluded = mask_columns(params.n, {0});

  MlpBuilder reciprocal(r.dim);
  reciprocal.add_spline(inv, {{r.k, 1.0}}, r.bias, r.khat, 1.0);

  const SplineNet sq = approx_square(plan.sq_hat_delta, params.eps / N);
  MlpBuilder product(r.dim);
  product.add_spline(sq, {{r.khat, 1.0 / N}, {r.p, 1.0}}, r.bias, r.y, N / 4.0);
  product.add_spline(sq, {{r.khat, 1.0 / N}, {r.p, -1.0}}, r.bias, r.y, -N / 4.0);

  return {Block{attn, reciprocal.build(), "read-out: p-hat and k-hat", false},
          Block{nullptr, product.build(), "read-out: prediction", false}};
}

Transformer assemble(const ConstructionParams& params, const ConstructionPlan& plan, int iterations) {
  const int pairs = iterations < 0 ? plan.L : iterations;
  Transformer tf;
  tf.blocks.reserve(static_cast<std::size_t>(2 * pairs + 5));
  for (Block& b : build_readin(params, plan)) tf.blocks.push_back(std::move(b));
  const std::vector<Block> pair = build_iteration_pair(params, plan);
  for (int l = 0; l < pairs; ++l) {
    tf.blocks.push_back(pair[0]);
    tf.blocks.push_back(pair[1]);
  }
  for (Block& b : build_readout(params, plan)) tf.blocks.push_back(std::move(b));
  return tf;
}

int pair_block_index(int pair) { return 2 * pair + 2; }

VectorXd ConstructedRun::w_snapshot(int pair) const {
  if (pair < 0 || pair > iterations) throw std::out_of_range("iteration pair out of range");
  const TokenMatrix& Z = after_block(pair_block_index(pair));
  return Z.block(prompt.rows.w, 1, 1, prompt.n).transpose();
}

const TokenMatrix& ConstructedRun::after_block(int block) const {
  for (const Capture& c : captures) {
    if (c.block == block) return c.tokens;
  }
  throw std::out_of_range("block was not captured");
}

ConstructedRun assemble_and_run(const ConstructionParams& params, const MatrixXd& X,
                                const VectorXd& y, int iterations) {
  ConstructedRun run;
  run.plan = make_plan(params);
  run.prompt = encode_prompt(X, y, params);
  run.iterations = iterations < 0 ? run.plan.L : iterations;
  const Transformer tf = assemble(params, run.plan, run.iterations);
  ForwardResult fr = transformer_forward(run.prompt.Z, tf, true);
  run.prediction = readout(fr.output, params.d);
  run.captures = std::move(fr.captures);
  return run;
}

}  // namespace krrtf

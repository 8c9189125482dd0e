#include "krrtf/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace krrtf {

MlpWeights::MlpWeights(const MatrixXd& w_in, const MatrixXd& w_out)
    : w_in_(w_in.sparseView(0.0, 0.0)), w_out_(w_out.sparseView(0.0, 0.0)) {
  w_in_.makeCompressed();
  w_out_.makeCompressed();
  check();
}

MlpWeights::MlpWeights(SparseRows w_in, SparseRows w_out)
    : w_in_(std::move(w_in)), w_out_(std::move(w_out)) {
  w_in_.makeCompressed();
  w_out_.makeCompressed();
  check();
}

void MlpWeights::check() const {
  if (w_in_.rows() < 1) throw std::invalid_argument("MLP needs at least one hidden unit");
  if (w_out_.cols() != w_in_.rows() || w_out_.rows() != w_in_.cols()) {
    throw std::invalid_argument("MLP weight shapes are inconsistent");
  }
}

TokenMatrix attention_forward(const TokenMatrix& Z, const AttentionWeights& w) {
  const Eigen::Index D = Z.rows();
  const Eigen::Index n = Z.cols();
  if (w.query.rows() != D || w.query.cols() != D || w.key.rows() != D || w.key.cols() != D ||
      w.value.rows() != D || w.value.cols() != D) {
    throw std::invalid_argument("attention weight shape does not match token dimension");
  }
  if (w.excluded.rows() != n || w.excluded.cols() != n) {
    throw std::invalid_argument("attention mask shape does not match token count");
  }
  const MatrixXd Q = w.query * Z;
  const MatrixXd K = w.key * Z;
  const MatrixXd V = w.value * Z;
  const MatrixXd scores = Q.transpose() * K;

  MatrixXd weights = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double top = -INFINITY;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!w.excluded(i, j)) top = std::max(top, scores(i, j));
    }
    if (top == -INFINITY) throw std::domain_error("attention row has every key masked");
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w.excluded(i, j)) continue;
      const double e = std::exp(scores(i, j) - top);
      weights(i, j) = e;
      total += e;
    }
    weights.row(i) /= total;
  }
  return Z + V * weights.transpose();
}

TokenMatrix mlp_forward(const TokenMatrix& Z, const MlpWeights& w) {
  if (w.dim() != Z.rows()) throw std::invalid_argument("MLP input width does not match token dimension");
  const MatrixXd hidden = (w.w_in() * Z).cwiseMax(0.0);
  return Z + w.w_out() * hidden;
}

TokenMatrix block_forward(const TokenMatrix& Z, const Block& block) {
  TokenMatrix out = block.attention ? attention_forward(Z, *block.attention) : Z;
  if (block.mlp) out = mlp_forward(out, *block.mlp);
  return out;
}

ForwardResult transformer_forward(const TokenMatrix& Z, const Transformer& tf, bool capture_all) {
  ForwardResult result;
  result.output = Z;
  for (std::size_t b = 0; b < tf.blocks.size(); ++b) {
    result.output = block_forward(result.output, tf.blocks[b]);
    if (capture_all || tf.blocks[b].capture) {
      result.captures.push_back(Capture{static_cast<int>(b), result.output});
    }
  }
  return result;
}

double readout(const TokenMatrix& Z, int d) {
  if (d < 0 || Z.rows() <= d || Z.cols() < 2) throw std::invalid_argument("token matrix too small for readout");
  return Z(d, Z.cols() - 1);
}

}  // namespace krrtf

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace krrtf {

using Eigen::MatrixXd;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Tokens are columns.
using TokenMatrix = MatrixXd;

struct AttentionWeights {
  MatrixXd query;
  MatrixXd key;
  MatrixXd value;
  // true = key j excluded for query i
  MaskMatrix excluded;
};

// Immutable residual ReLU MLP. Stored sparse; the constructed layers have a
// handful of nonzeros per hidden unit.
class MlpWeights {
 public:
  MlpWeights(const MatrixXd& w_in, const MatrixXd& w_out);
  MlpWeights(SparseRows w_in, SparseRows w_out);

  int hidden() const { return static_cast<int>(w_in_.rows()); }
  int dim() const { return static_cast<int>(w_in_.cols()); }
  const SparseRows& w_in() const { return w_in_; }
  const SparseRows& w_out() const { return w_out_; }

 private:
  void check() const;

  SparseRows w_in_;
  SparseRows w_out_;
};

struct Block {
  std::shared_ptr<const AttentionWeights> attention;
  std::shared_ptr<const MlpWeights> mlp;
  std::string label;
  bool capture = false;
};

struct Transformer {
  std::vector<Block> blocks;
};

struct Capture {
  int block = 0;
  TokenMatrix tokens;
};

struct ForwardResult {
  TokenMatrix output;
  std::vector<Capture> captures;
};

TokenMatrix attention_forward(const TokenMatrix& Z, const AttentionWeights& w);
TokenMatrix mlp_forward(const TokenMatrix& Z, const MlpWeights& w);
TokenMatrix block_forward(const TokenMatrix& Z, const Block& block);

// capture_all stores Z after every block; otherwise only flagged blocks.
ForwardResult transformer_forward(const TokenMatrix& Z, const Transformer& tf,
                                  bool capture_all = false);

// Entry in the y row (index d) of the test token (last column).
double readout(const TokenMatrix& Z, int d);

}  // namespace krrtf

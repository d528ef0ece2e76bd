#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gcx/rng.hpp"
#include "gcx/tape.hpp"

namespace gcx {

/// Stack of affine layers with relu between them; the final layer is left
/// linear so the owner can attach whatever head it needs. Weights are stored
/// input-major (in x out) so a batch forward is a plain right-multiply.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // layer l: dims[l] x dims[l+1]
  std::vector<Eigen::MatrixXd> biases;   // 1 x dims[l+1]

  static Mlp make(const std::vector<int>& dims, SeededRng& rng);

  int input_dim() const { return static_cast<int>(weights.front().rows()); }
  int output_dim() const { return static_cast<int>(weights.back().cols()); }

  /// Graph-building forward on a tape; `params` must come from bind().
  ad::Var forward(ad::Tape& tape, ad::Var x,
                  const std::vector<ad::Var>& params) const;
  /// Plain forward without gradient tracking.
  Eigen::MatrixXd forward_nograd(const Eigen::MatrixXd& x) const;

  /// Registers all weights and biases as tracked variables on the tape,
  /// in the same order as params()/apply_grads expects.
  std::vector<ad::Var> bind(ad::Tape& tape) const;

  std::vector<Eigen::MatrixXd*> params();
  int param_count() const { return static_cast<int>(weights.size()) * 2; }
};

}  // namespace gcx

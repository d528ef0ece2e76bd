#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace gcx::ad {

class Tape;

/// Lightweight handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

/// Record-and-replay reverse-mode differentiation over dense double tensors
/// (scalars, vectors and matrices, all stored as Eigen::MatrixXd).
///
/// Operations append nodes in topological order; backward() walks the record
/// once in reverse, accumulating adjoints additively into each tracked node.
/// A Tape is single-threaded; independent Tapes may live on distinct threads.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int)>;

  /// Untracked node: no gradient ever flows into it.
  Var constant(Eigen::MatrixXd value);
  /// Tracked leaf; its gradient is available after backward().
  Var variable(Eigen::MatrixXd value);

  Var scalar_constant(double v);

  const Eigen::MatrixXd& value(Var v) const;
  /// Accumulated adjoint of a tracked node (zero matrix if untouched).
  const Eigen::MatrixXd& grad(Var v) const;

  /// Reverse sweep from a 1x1 loss node. Adjoints accumulate additively
  /// across repeated calls; use zero_grad() between independent sweeps.
  void backward(Var loss);
  void zero_grad();

  std::size_t size() const { return nodes_.size(); }

  // -- used by operation builders ------------------------------------------
  int emplace(Eigen::MatrixXd value, std::vector<int> parents, BackFn back,
              bool tracked);
  bool tracked(int id) const { return nodes_[static_cast<std::size_t>(id)].tracked; }
  const Eigen::MatrixXd& val(int id) const {
    return nodes_[static_cast<std::size_t>(id)].value;
  }
  bool has_grad(int id) const {
    return nodes_[static_cast<std::size_t>(id)].grad.size() > 0;
  }
  const Eigen::MatrixXd& grad_at(int id) const;
  /// Adds g into the adjoint buffer of node `id` (no-op for untracked nodes).
  template <typename Derived>
  void accumulate_grad(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.tracked) return;
    if (n.grad.size() == 0) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
  }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;  // lazily sized on first accumulation
    std::vector<int> parents;
    BackFn back;
    bool tracked = false;
  };
  std::vector<Node> nodes_;
  Eigen::MatrixXd zero_{};
};

// -- primitive operations ----------------------------------------------------
// Shape rules are checked eagerly; violations throw std::invalid_argument
// naming the offending extents.

Var matmul(Var a, Var b);     // A * B
Var matmul_nt(Var a, Var b);  // A * B^T
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var neg(Var a);
Var cmul(Var a, Var b);  // elementwise product
Var scale(Var a, double c);
/// a: n x m, row: 1 x m; adds `row` to every row of `a`.
Var broadcast_add_row(Var a, Var row);
Var relu(Var a);
Var logistic(Var a);
Var normal_cdf(Var a);
Var softmax_rows(Var a);
Var log(Var a);
Var exp(Var a);
Var clamp_min(Var a, double lo);
Var sum(Var a);   // 1x1
Var mean(Var a);  // 1x1
Var reshape(Var a, int rows, int cols);
/// n x m -> (n/block) x m; each output row is the mean of `block`
/// consecutive input rows.
Var rows_block_mean(Var a, int block);

// forward-only helpers shared with non-tape code paths
Eigen::MatrixXd logistic_forward(const Eigen::MatrixXd& x);
Eigen::MatrixXd normal_cdf_forward(const Eigen::MatrixXd& x);
Eigen::MatrixXd softmax_rows_forward(const Eigen::MatrixXd& x);

}  // namespace gcx::ad

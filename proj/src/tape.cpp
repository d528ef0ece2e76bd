#include "gcx/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gcx::ad {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::string shape_of(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const char* op, const Eigen::MatrixXd& a,
                        const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_of(a) + " vs " + shape_of(b));
  }
}

Tape* same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument("operands must live on the same tape");
  }
  return a.tape;
}

}  // namespace

Var Tape::constant(Eigen::MatrixXd value) {
  const int id = emplace(std::move(value), {}, nullptr, false);
  return Var{this, id};
}

Var Tape::variable(Eigen::MatrixXd value) {
  const int id = emplace(std::move(value), {}, nullptr, true);
  return Var{this, id};
}

Var Tape::scalar_constant(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

int Tape::emplace(Eigen::MatrixXd value, std::vector<int> parents, BackFn back,
                  bool tracked) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  n.tracked = tracked;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Eigen::MatrixXd& Tape::value(Var v) const {
  return nodes_.at(static_cast<std::size_t>(v.id)).value;
}

const Eigen::MatrixXd& Tape::grad_at(int id) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(id));
  if (n.grad.size() == 0) {
    Eigen::MatrixXd& z = const_cast<Tape*>(this)->zero_;
    z = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
    return z;
  }
  return n.grad;
}

const Eigen::MatrixXd& Tape::grad(Var v) const { return grad_at(v.id); }

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("loss lives on a different tape");
  const Node& ln = nodes_.at(static_cast<std::size_t>(loss.id));
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1x1 scalar, got " +
                                shape_of(ln.value));
  }
  accumulate_grad(loss.id, Eigen::MatrixXd::Ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.tracked || !n.back || n.grad.size() == 0) continue;
    n.back(*this, i);
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad.resize(0, 0);
}

namespace {

Var make(Tape& t, Eigen::MatrixXd value, std::vector<int> parents,
         Tape::BackFn back) {
  bool tracked = false;
  for (int p : parents) tracked = tracked || t.tracked(p);
  const int id = t.emplace(std::move(value), std::move(parents),
                           tracked ? std::move(back) : Tape::BackFn{}, tracked);
  return Var{&t, id};
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *same_tape(a, b);
  const Eigen::MatrixXd& A = t.val(a.id);
  const Eigen::MatrixXd& B = t.val(b.id);
  if (A.cols() != B.rows()) {
    throw std::invalid_argument("matmul: inner extents differ, " + shape_of(A) +
                                " * " + shape_of(B));
  }
  const int ai = a.id, bi = b.id;
  return make(t, A * B, {ai, bi}, [ai, bi](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, G * tp.val(bi).transpose());
    tp.accumulate_grad(bi, tp.val(ai).transpose() * G);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *same_tape(a, b);
  const Eigen::MatrixXd& A = t.val(a.id);
  const Eigen::MatrixXd& B = t.val(b.id);
  if (A.cols() != B.cols()) {
    throw std::invalid_argument("matmul_nt: inner extents differ, " +
                                shape_of(A) + " * " + shape_of(B) + "^T");
  }
  const int ai = a.id, bi = b.id;
  return make(t, A * B.transpose(), {ai, bi}, [ai, bi](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, G * tp.val(bi));
    tp.accumulate_grad(bi, G.transpose() * tp.val(ai));
  });
}

Var add(Var a, Var b) {
  Tape& t = *same_tape(a, b);
  require_same_shape("add", t.val(a.id), t.val(b.id));
  const int ai = a.id, bi = b.id;
  return make(t, t.val(ai) + t.val(bi), {ai, bi}, [ai, bi](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, G);
    tp.accumulate_grad(bi, G);
  });
}

Var sub(Var a, Var b) {
  Tape& t = *same_tape(a, b);
  require_same_shape("sub", t.val(a.id), t.val(b.id));
  const int ai = a.id, bi = b.id;
  return make(t, t.val(ai) - t.val(bi), {ai, bi}, [ai, bi](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, G);
    tp.accumulate_grad(bi, -G);
  });
}

Var neg(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, -t.val(ai), {ai}, [ai](Tape& tp, int self) {
    tp.accumulate_grad(ai, -tp.grad_at(self));
  });
}

Var cmul(Var a, Var b) {
  Tape& t = *same_tape(a, b);
  require_same_shape("cmul", t.val(a.id), t.val(b.id));
  const int ai = a.id, bi = b.id;
  return make(t, t.val(ai).cwiseProduct(t.val(bi)), {ai, bi},
              [ai, bi](Tape& tp, int self) {
                const Eigen::MatrixXd& G = tp.grad_at(self);
                tp.accumulate_grad(ai, G.cwiseProduct(tp.val(bi)));
                tp.accumulate_grad(bi, G.cwiseProduct(tp.val(ai)));
              });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, c * t.val(ai), {ai}, [ai, c](Tape& tp, int self) {
    tp.accumulate_grad(ai, c * tp.grad_at(self));
  });
}

Var broadcast_add_row(Var a, Var row) {
  Tape& t = *same_tape(a, row);
  const Eigen::MatrixXd& A = t.val(a.id);
  const Eigen::MatrixXd& R = t.val(row.id);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw std::invalid_argument("broadcast_add_row: row is " + shape_of(R) +
                                ", expected 1x" + std::to_string(A.cols()));
  }
  Eigen::MatrixXd out = A;
  out.rowwise() += R.row(0);
  const int ai = a.id, ri = row.id;
  return make(t, std::move(out), {ai, ri}, [ai, ri](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, G);
    tp.accumulate_grad(ri, G.colwise().sum());
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, t.val(ai).cwiseMax(0.0), {ai}, [ai](Tape& tp, int self) {
    const Eigen::MatrixXd mask =
        (tp.val(ai).array() > 0.0).cast<double>().matrix();
    tp.accumulate_grad(ai, tp.grad_at(self).cwiseProduct(mask));
  });
}

Eigen::MatrixXd logistic_forward(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Var logistic(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, logistic_forward(t.val(ai)), {ai}, [ai](Tape& tp, int self) {
    const Eigen::ArrayXXd s = tp.val(self).array();
    tp.accumulate_grad(
        ai, tp.grad_at(self).cwiseProduct((s * (1.0 - s)).matrix()));
  });
}

Var normal_cdf(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  Eigen::MatrixXd phi = normal_cdf_forward(t.val(ai));
  return make(t, std::move(phi), {ai}, [ai](Tape& tp, int self) {
    const Eigen::MatrixXd pdf =
        (-0.5 * tp.val(ai).array().square()).exp().matrix() * kInvSqrt2Pi;
    tp.accumulate_grad(ai, tp.grad_at(self).cwiseProduct(pdf));
  });
}

Eigen::MatrixXd normal_cdf_forward(const Eigen::MatrixXd& x) {
  return x.unaryExpr(
      [](double v) { return 0.5 * std::erfc(-v * kInvSqrt2); });
}

Eigen::MatrixXd softmax_rows_forward(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).array() - m).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  return out;
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, softmax_rows_forward(t.val(ai)), {ai},
              [ai](Tape& tp, int self) {
                const Eigen::MatrixXd& G = tp.grad_at(self);
                const Eigen::MatrixXd& P = tp.val(self);
                Eigen::MatrixXd gin(P.rows(), P.cols());
                for (Eigen::Index r = 0; r < P.rows(); ++r) {
                  const double dot = G.row(r).dot(P.row(r));
                  gin.row(r) = P.row(r).cwiseProduct(
                      G.row(r) - Eigen::RowVectorXd::Constant(P.cols(), dot));
                }
                tp.accumulate_grad(ai, gin);
              });
}

Var log(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, t.val(ai).array().log().matrix(), {ai},
              [ai](Tape& tp, int self) {
                tp.accumulate_grad(
                    ai, tp.grad_at(self).cwiseQuotient(tp.val(ai)));
              });
}

Var exp(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, t.val(ai).array().exp().matrix(), {ai},
              [ai](Tape& tp, int self) {
                tp.accumulate_grad(
                    ai, tp.grad_at(self).cwiseProduct(tp.val(self)));
              });
}

Var clamp_min(Var a, double lo) {
  Tape& t = *a.tape;
  const int ai = a.id;
  return make(t, t.val(ai).cwiseMax(lo), {ai}, [ai, lo](Tape& tp, int self) {
    const Eigen::MatrixXd mask =
        (tp.val(ai).array() > lo).cast<double>().matrix();
    tp.accumulate_grad(ai, tp.grad_at(self).cwiseProduct(mask));
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = t.val(ai).sum();
  return make(t, std::move(s), {ai}, [ai](Tape& tp, int self) {
    const double g = tp.grad_at(self)(0, 0);
    tp.accumulate_grad(ai, Eigen::MatrixXd::Constant(tp.val(ai).rows(),
                                                     tp.val(ai).cols(), g));
  });
}

Var mean(Var a) {
  Tape& t = *a.tape;
  const int ai = a.id;
  const double n = static_cast<double>(t.val(ai).size());
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = t.val(ai).sum() / n;
  return make(t, std::move(s), {ai}, [ai, n](Tape& tp, int self) {
    const double g = tp.grad_at(self)(0, 0) / n;
    tp.accumulate_grad(ai, Eigen::MatrixXd::Constant(tp.val(ai).rows(),
                                                     tp.val(ai).cols(), g));
  });
}

Var reshape(Var a, int rows, int cols) {
  Tape& t = *a.tape;
  const Eigen::MatrixXd& A = t.val(a.id);
  if (static_cast<Eigen::Index>(rows) * cols != A.size()) {
    throw std::invalid_argument(
        "reshape: cannot view " + shape_of(A) + " as " + std::to_string(rows) +
        "x" + std::to_string(cols));
  }
  Eigen::MatrixXd out =
      Eigen::Map<const Eigen::MatrixXd>(A.data(), rows, cols);
  const int ai = a.id;
  return make(t, std::move(out), {ai}, [ai](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    tp.accumulate_grad(ai, Eigen::Map<const Eigen::MatrixXd>(
                               G.data(), tp.val(ai).rows(), tp.val(ai).cols()));
  });
}

Var rows_block_mean(Var a, int block) {
  Tape& t = *a.tape;
  const Eigen::MatrixXd& A = t.val(a.id);
  if (block <= 0 || A.rows() % block != 0) {
    throw std::invalid_argument("rows_block_mean: " + std::to_string(A.rows()) +
                                " rows not divisible by block " +
                                std::to_string(block));
  }
  const Eigen::Index nout = A.rows() / block;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nout, A.cols());
  for (Eigen::Index r = 0; r < nout; ++r) {
    out.row(r) = A.middleRows(r * block, block).colwise().mean();
  }
  const int ai = a.id;
  return make(t, std::move(out), {ai}, [ai, block](Tape& tp, int self) {
    const Eigen::MatrixXd& G = tp.grad_at(self);
    Eigen::MatrixXd gin(tp.val(ai).rows(), tp.val(ai).cols());
    const double inv = 1.0 / static_cast<double>(block);
    for (Eigen::Index r = 0; r < G.rows(); ++r) {
      gin.middleRows(r * block, block) = (inv * G.row(r)).replicate(block, 1);
    }
    tp.accumulate_grad(ai, gin);
  });
}

}  // namespace gcx::ad

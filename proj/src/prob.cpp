#include "gcx/prob.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gcx {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("binary_entropy: p = " + std::to_string(p) +
                                " outside [0, 1]");
  }
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

double entropy_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
  if (probs.size() == 0) throw std::invalid_argument("entropy: empty vector");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) {
      throw std::invalid_argument("entropy: negative entry " +
                                  std::to_string(probs[i]) + " at index " +
                                  std::to_string(i));
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("entropy: mass sums to " +
                                std::to_string(total) + ", not 1");
  }
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
  }
  return h < 0.0 ? 0.0 : h;
}

double gaussian_sigmoid_expectation(double mu, double var) {
  if (var < 0.0) {
    throw std::invalid_argument("gaussian_sigmoid_expectation: variance " +
                                std::to_string(var) + " is negative");
  }
  return normal_cdf(mu / std::sqrt(1.0 + var));
}

double kl_std_normal_vs(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n) throw std::invalid_argument("kl: covariance not square");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("kl: covariance not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("kl: covariance not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(L(i, i));
  // tr(cov^-1) = ||L^-1||_F^2
  const Eigen::MatrixXd Linv =
      L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  const double trace_inv = Linv.squaredNorm();
  const double kl =
      0.5 * (trace_inv - static_cast<double>(n) + logdet);
  return kl < 0.0 ? 0.0 : kl;
}

void GaussianSpec::validate() const {
  const Eigen::Index n = mean.size();
  if (covariance.rows() != n || covariance.cols() != n) {
    throw std::invalid_argument("GaussianSpec: covariance is " +
                                std::to_string(covariance.rows()) + "x" +
                                std::to_string(covariance.cols()) +
                                " but mean has length " + std::to_string(n));
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("GaussianSpec: covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("GaussianSpec: covariance not positive definite");
  }
}

void CategoricalDist::validate() const { entropy_categorical(probs); }

Eigen::VectorXd sample_std_normal(SeededRng& rng, int n) {
  if (n < 1) throw std::invalid_argument("sample_std_normal: n < 1");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Eigen::MatrixXd sample_std_normal_matrix(SeededRng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n < 1");
  // Jacobi matrix for the physicists' weight exp(-x^2); transform the nodes
  // by sqrt(2) and normalize the weights to the N(0,1) measure.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(0.5 * static_cast<double>(k));
    jacobi(k - 1, k) = off;
    jacobi(k, k - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermite gh;
  gh.nodes = es.eigenvalues() * std::sqrt(2.0);
  gh.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = v0 * v0;  // already sums to 1 under the N(0,1) measure
  }
  return gh;
}

}  // namespace gcx

#pragma once

#include <Eigen/Dense>

#include "gcx/rng.hpp"

namespace gcx {

// Every information quantity in this library is reported in nats; the only
// base-2 arithmetic lives inside the prediction-error certificate, which
// converts at its boundary.

double normal_cdf(double x);
double normal_pdf(double x);

/// Numerically stable logistic with slope parameter applied by the caller.
double logistic(double x);

/// Entropy of a Bernoulli(p) in nats, with the 0 log 0 = 0 convention.
/// Throws for p outside [0, 1].
double binary_entropy(double p);

/// Entropy of a point on the simplex, in nats. Rejects vectors with negative
/// entries or whose mass differs from 1 by more than 1e-9.
double entropy_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs);

/// E[Phi(Z)] for Z ~ N(mu, var), which has the closed form
/// Phi(mu / sqrt(1 + var)). Rejects negative variances.
double gaussian_sigmoid_expectation(double mu, double var);

/// KL( N(0, I) || N(0, cov) ) in nats. cov must be symmetric (to 1e-12)
/// positive definite; equals 0 iff cov == I.
double kl_std_normal_vs(const Eigen::Ref<const Eigen::MatrixXd>& cov);

/// Zero-mean multivariate Gaussian with validated covariance.
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  /// Throws unless covariance is symmetric within 1e-12 with all
  /// eigenvalues > 0.
  void validate() const;
};

struct CategoricalDist {
  Eigen::VectorXd probs;
  void validate() const;
};

Eigen::VectorXd sample_std_normal(SeededRng& rng, int n);
Eigen::MatrixXd sample_std_normal_matrix(SeededRng& rng, int rows, int cols);

/// Nodes/weights such that E[f(Z)] ~= sum_i weights[i] * f(nodes[i]) for
/// Z ~ N(0, 1). Computed by eigendecomposition of the Jacobi matrix.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermite gauss_hermite(int n);

}  // namespace gcx

#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "gcx/classifiers.hpp"
#include "gcx/generative.hpp"
#include "gcx/influence.hpp"
#include "gcx/rng.hpp"

namespace gcx {

/// Decoded traversal of one latent factor around a set of anchor latents,
/// with classifier probabilities attached to every cell. The traversal is
/// centered on each anchor's own coordinate, so the middle column of an
/// odd-length sweep reproduces the anchor's reconstruction.
struct SweepGrid {
  int factor = 0;
  Eigen::VectorXd offsets;              // length S
  Eigen::MatrixXd anchors;              // n_anchors x (K+L)
  std::vector<Eigen::MatrixXd> decoded;  // per anchor: S x D
  std::vector<Eigen::MatrixXd> probs;    // per anchor: S x M
};

SweepGrid latent_sweep(const Generator& g, const Classifier& f,
                       const Eigen::MatrixXd& anchors, int factor,
                       double range = 3.0, int steps = 7);

enum class LandscapeKind { kSingleHyperplane, kAndQuadrant };

/// Influence values for the 2-D weight-orientation study: the generator's
/// two columns are rotated over a regular angle grid and every requested
/// variant is estimated per cell with common random draws. For the single
/// hyperplane the marginal class entropy H(Y) is recorded per cell; the
/// Gaussian fidelity of each cell is always recorded.
struct AngleLandscape {
  Eigen::VectorXd thetas_deg;  // covers [0, 180)
  std::map<InfluenceVariant, Eigen::MatrixXd> influence;  // theta1 x theta2
  Eigen::MatrixXd marginal_entropy;
  Eigen::MatrixXd fidelity;

  /// Grid argmax of influence[v] + lambda * fidelity.
  std::pair<int, int> argmax_combined(InfluenceVariant v, double lambda) const;
};

struct LandscapeConfig {
  LandscapeKind kind = LandscapeKind::kSingleHyperplane;
  std::vector<InfluenceVariant> variants = {
      InfluenceVariant::kJoint, InfluenceVariant::kIndependentUnconditional,
      InfluenceVariant::kIndependentConditional,
      InfluenceVariant::kJointConditional};
  double grid_step_deg = 15.0;
  int n_alpha = 2500;
  int n_beta = 500;
  double steepness = 5.0;  // logistic steepness of the studied classifier
  double gamma = 0.05;
};

AngleLandscape angle_landscape(const LandscapeConfig& cfg, SeededRng& rng);

struct InterventionResult {
  double original_accuracy = 0.0;
  double reencoded_accuracy = 0.0;
  double intervened_accuracy = 0.0;
};

/// Classifier accuracy before/after replacing one latent factor of every
/// encoded validation sample with a fresh prior draw. Requires an encoder,
/// hence the VAE backend.
InterventionResult intervention_accuracy_drop(const VaeModel& g,
                                              const Classifier& f,
                                              const Dataset& validation,
                                              int factor, SeededRng& rng);

/// Upper bound on the error of the MAP prediction of the classifier output
/// from the causal factors, given their mutual information in nats. Inverts
/// the piecewise-linear entropy/error envelope through the points
/// (error = (m-1)/m, entropy = log2 m), m = 1..M; the bound lives in
/// [0, (M-1)/M]. Rejects mi_nats outside [0, ln M].
double capacity_certificate(double mi_nats, int num_classes);

}  // namespace gcx

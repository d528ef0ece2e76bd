#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gcx/classifiers.hpp"
#include "gcx/generative.hpp"
#include "gcx/rng.hpp"
#include "gcx/tape.hpp"

namespace gcx {

/// The influence objective family. "joint" treats the causal block as one
/// variable; "independent" averages per-factor values; "conditional" holds
/// the remaining latent factors clamped in the outer loop (the imposing
/// semantics), which in this graph equals conditional mutual information.
enum class InfluenceVariant {
  kJoint,
  kIndependentUnconditional,
  kIndependentConditional,
  kJointConditional,
};

std::string to_string(InfluenceVariant v);
InfluenceVariant influence_variant_from_string(const std::string& s);

struct InfluenceEstimate {
  double value = 0.0;  // nats
  InfluenceVariant variant = InfluenceVariant::kJoint;
  int n_alpha = 0;
  int n_beta = 0;
  int n_x = 1;
  std::uint64_t seed = 0;
};

/// Frozen sample grid for one estimator evaluation: exogenous latent and
/// noise draws laid out outer-major so the estimate is a deterministic,
/// differentiable function of the generator parameters. Per-factor variants
/// carry one block per causal factor.
struct InfluenceGrid {
  InfluenceVariant variant = InfluenceVariant::kJoint;
  int n_outer = 0;
  int n_inner = 0;
  int n_x = 1;
  bool conditional = false;
  std::vector<Eigen::MatrixXd> z_blocks;      // rows x (K+L)
  std::vector<Eigen::MatrixXd> noise_blocks;  // rows x D (empty if unused)
  std::uint64_t seed = 0;
};

InfluenceGrid make_influence_grid(const Generator& g, InfluenceVariant variant,
                                  int n_alpha, int n_beta, int n_x,
                                  SeededRng& rng);

/// Influence value as a graph node; `params` must come from g.bind(tape).
/// Gradients flow into the generator parameters through the fixed draws
/// (the classifier joins only through its probability/gradient interface).
ad::Var influence_var(ad::Tape& tape, const Generator& g,
                      const std::vector<ad::Var>& params, const Classifier& f,
                      const InfluenceGrid& grid);

/// Sample-based estimate of the chosen influence variant. For the joint
/// variant this follows the nested alpha/beta sampling scheme exactly with
/// n_x draws of x per latent pair (default 1); conditional variants place
/// the conditioning block in the outer loop with n_beta outer draws and
/// n_alpha inner draws.
InfluenceEstimate estimate_influence(const Generator& g, const Classifier& f,
                                     InfluenceVariant variant, int n_alpha,
                                     int n_beta, SeededRng& rng, int n_x = 1);

/// The two terms of the joint estimate, (H(Y), E_alpha[H(Y|alpha)]), from
/// the same sample grid: their difference reproduces
/// estimate_influence(kJoint) bit for bit under the same seed.
std::pair<double, double> decomposition_terms(const Generator& g,
                                              const Classifier& f, int n_alpha,
                                              int n_beta, SeededRng& rng,
                                              int n_x = 1);

/// Single-factor influence I(z_i; Y) for every latent dimension, causal and
/// noncausal alike: factor i runs in the outer loop, all remaining factors
/// are marginalized in the inner loop.
Eigen::VectorXd per_factor_information_flow(const Generator& g,
                                            const Classifier& f, int n_alpha,
                                            int n_beta, SeededRng& rng,
                                            int n_x = 1);

}  // namespace gcx

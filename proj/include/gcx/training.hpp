#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gcx/classifiers.hpp"
#include "gcx/data.hpp"
#include "gcx/generative.hpp"
#include "gcx/influence.hpp"
#include "gcx/rng.hpp"

namespace gcx {

/// First/second-moment state for Adam. adam_step performs gradient ASCENT
/// (parameters move along +grad); callers maximizing an objective pass its
/// gradient directly.
struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;
};

void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

struct TrainConfig {
  int latent_causal = 1;   // K
  int latent_noise = 1;    // L
  double lambda = 0.05;    // fidelity weight
  int n_alpha = 100;
  int n_beta = 25;
  int n_x = 1;
  int steps = 8000;
  int batch_size = 64;
  double learning_rate = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  InfluenceVariant variant = InfluenceVariant::kJoint;
  double gamma = 0.05;  // linear-Gaussian noise level
  int trace_every = 10;
};

struct TraceRow {
  int step = 0;
  double c_term = 0.0;
  double d_term = 0.0;
  double total = 0.0;
  double wall_seconds = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  double final_c = 0.0;
  double final_d = 0.0;
};

struct ObjectiveValue {
  double total = 0.0;
  double c_term = 0.0;
  double d_term = 0.0;
};

/// One evaluation of the combined objective C + lambda * D for a
/// linear-Gaussian map (D is the closed-form Gaussian fidelity against
/// data_cov, isotropic by default) without touching parameters.
ObjectiveValue combined_objective(const LinearGaussianMap& g,
                                  const Classifier& f, const TrainConfig& cfg,
                                  SeededRng& rng,
                                  const Eigen::MatrixXd& data_cov);

/// VAE flavor: D is the evidence lower bound on the given batch.
ObjectiveValue combined_objective(const VaeModel& g, const Classifier& f,
                                  const TrainConfig& cfg, SeededRng& rng,
                                  const Eigen::MatrixXd& batch);

/// Maximizes C + lambda * D over the weight columns by Adam with fresh
/// sample grids each step; columns are re-projected to magnitude
/// sqrt(1 - gamma) after every update. data_cov empty means isotropic.
std::pair<LinearGaussianMap, TrainTrace> train_lingauss_explainer(
    const Classifier& f, const TrainConfig& cfg,
    const Eigen::MatrixXd& data_cov = Eigen::MatrixXd());

/// Maximizes C + lambda * ELBO over encoder and decoder jointly.
/// `lambda_only_fidelity` drops the C term entirely (used by the budget
/// selection step, where K may be zero).
std::pair<VaeModel, TrainTrace> train_vae_explainer(
    const Classifier* f, const Dataset& data, const TrainConfig& cfg,
    const VaeArch& arch = VaeArch(), bool fidelity_only = false);

}  // namespace gcx

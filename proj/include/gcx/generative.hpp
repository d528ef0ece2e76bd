#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gcx/mlp.hpp"
#include "gcx/rng.hpp"
#include "gcx/tape.hpp"

namespace gcx {

/// Latent point split into causal factors (first K entries) and noncausal
/// factors (last L entries); the prior over both is standard normal.
struct LatentVector {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  int total_dim() const {
    return static_cast<int>(alpha.size() + beta.size());
  }
  Eigen::VectorXd concat() const;
};

/// Common surface the influence estimators see: a differentiable map from
/// latent draws to data space. Rows of Z are latent points [alpha | beta];
/// `noise` carries any exogenous draws the map consumes (may be empty).
class Generator {
 public:
  virtual ~Generator() = default;
  virtual int latent_causal() const = 0;  // K
  virtual int latent_noise() const = 0;   // L
  virtual int data_dim() const = 0;
  virtual bool wants_noise() const { return false; }

  virtual Eigen::MatrixXd generate_batch(const Eigen::MatrixXd& z,
                                         const Eigen::MatrixXd& noise) const = 0;
  /// Binds the map's parameters on the tape (order matches params()).
  virtual std::vector<ad::Var> bind(ad::Tape& tape) const = 0;
  virtual ad::Var generate_var(ad::Tape& tape, const std::vector<ad::Var>& params,
                               const Eigen::MatrixXd& z,
                               const Eigen::MatrixXd& noise) const = 0;
  virtual std::vector<Eigen::MatrixXd*> params() = 0;

  int latent_dim() const { return latent_causal() + latent_noise(); }
};

/// x = W_alpha a + W_beta b + eps with eps ~ N(0, gamma I). Columns of the
/// weight blocks are the per-factor directions in data space.
class LinearGaussianMap : public Generator {
 public:
  LinearGaussianMap(Eigen::MatrixXd w_alpha, Eigen::MatrixXd w_beta,
                    double gamma);
  static LinearGaussianMap random(int data_dim, int k, int l, double gamma,
                                  SeededRng& rng);

  int latent_causal() const override { return static_cast<int>(w_alpha_.cols()); }
  int latent_noise() const override { return static_cast<int>(w_beta_.cols()); }
  int data_dim() const override { return static_cast<int>(w_alpha_.rows()); }
  bool wants_noise() const override { return true; }

  Eigen::MatrixXd generate_batch(const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& noise) const override;
  std::vector<ad::Var> bind(ad::Tape& tape) const override;
  ad::Var generate_var(ad::Tape& tape, const std::vector<ad::Var>& params,
                       const Eigen::MatrixXd& z,
                       const Eigen::MatrixXd& noise) const override;
  std::vector<Eigen::MatrixXd*> params() override;

  /// Draws eps internally from `rng`.
  Eigen::VectorXd generate(const LatentVector& z, SeededRng& rng) const;

  /// Projects every column of [W_alpha W_beta] to magnitude sqrt(1 - gamma).
  void normalize_columns();
  /// W W^T + gamma I, the covariance of generated samples.
  Eigen::MatrixXd covariance() const;

  const Eigen::MatrixXd& w_alpha() const { return w_alpha_; }
  const Eigen::MatrixXd& w_beta() const { return w_beta_; }
  Eigen::MatrixXd& mutable_w_alpha() { return w_alpha_; }
  Eigen::MatrixXd& mutable_w_beta() { return w_beta_; }
  double gamma() const { return gamma_; }

 private:
  Eigen::MatrixXd w_alpha_;  // D x K
  Eigen::MatrixXd w_beta_;   // D x L
  double gamma_;
};

struct VaeArch {
  std::vector<int> encoder_hidden = {256, 128};
  std::vector<int> decoder_hidden = {128, 256};
};

struct EncodeResult {
  Eigen::MatrixXd mean;     // n x (K+L)
  Eigen::MatrixXd log_var;  // n x (K+L)
  Eigen::MatrixXd sample;   // mean + exp(log_var / 2) .* eps
};

/// Encoder/decoder pair with diagonal-Gaussian posterior and Bernoulli
/// likelihood (sigmoid decoder head). The decoder doubles as the Generator
/// used for influence estimation, decoding deterministically to the
/// Bernoulli mean.
class VaeModel : public Generator {
 public:
  VaeModel(int data_dim, int k, int l, const VaeArch& arch, SeededRng& rng);

  int latent_causal() const override { return k_; }
  int latent_noise() const override { return l_; }
  int data_dim() const override { return data_dim_; }

  Eigen::MatrixXd generate_batch(const Eigen::MatrixXd& z,
                                 const Eigen::MatrixXd& noise) const override;
  std::vector<ad::Var> bind(ad::Tape& tape) const override;  // decoder only
  ad::Var generate_var(ad::Tape& tape, const std::vector<ad::Var>& params,
                       const Eigen::MatrixXd& z,
                       const Eigen::MatrixXd& noise) const override;
  std::vector<Eigen::MatrixXd*> params() override;  // decoder only

  EncodeResult encode(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      SeededRng& rng) const;
  Eigen::MatrixXd decode_mean(const Eigen::Ref<const Eigen::MatrixXd>& z) const;
  Eigen::MatrixXd decode_bernoulli(const Eigen::Ref<const Eigen::MatrixXd>& z,
                                   SeededRng& rng) const;

  /// Per-batch evidence lower bound: Bernoulli reconstruction log-likelihood
  /// minus KL(q(z|x) || N(0, I)), averaged over rows. Rejects batches with
  /// entries outside [0, 1].
  double elbo(const Eigen::Ref<const Eigen::MatrixXd>& batch, SeededRng& rng,
              double* recon_out = nullptr, double* kl_out = nullptr) const;

  /// Graph-building ELBO used in training; `eps` are the reparameterization
  /// draws, one row per batch row.
  ad::Var elbo_var(ad::Tape& tape, const std::vector<ad::Var>& all_params,
                   const Eigen::MatrixXd& batch,
                   const Eigen::MatrixXd& eps) const;

  /// Binds encoder trunk, both heads and decoder (order of all_params()).
  std::vector<ad::Var> bind_all(ad::Tape& tape) const;
  std::vector<Eigen::MatrixXd*> all_params();

  Mlp& mutable_encoder() { return encoder_; }
  Mlp& mutable_decoder() { return decoder_; }
  const Mlp& decoder() const { return decoder_; }

  // raw pieces, exposed for checkpointing
  Mlp encoder_;      // trunk ending in a relu hidden layer
  Eigen::MatrixXd mean_w_, mean_b_;
  Eigen::MatrixXd logvar_w_, logvar_b_;
  Mlp decoder_;      // latent -> data logits (sigmoid applied on top)

 private:
  int data_dim_, k_, l_;
};

/// Gaussian fidelity of a linear map against a data covariance: the
/// W-dependent part of -KL(N(0, data_cov) || N(0, W W^T + gamma I)).
/// For isotropic data_cov = I this equals -kl_std_normal_vs exactly.
double lingauss_fidelity(const LinearGaussianMap& map,
                         const Eigen::MatrixXd& data_cov);
/// Gradient of lingauss_fidelity with respect to [W_alpha W_beta].
Eigen::MatrixXd lingauss_fidelity_grad(const LinearGaussianMap& map,
                                       const Eigen::MatrixXd& data_cov);

/// Closed-form best fidelity achievable with `n_factors` latent directions
/// against a Gaussian data covariance (used by the budget-selection step).
double lingauss_best_fidelity(const Eigen::MatrixXd& data_cov, int n_factors,
                              double gamma);

}  // namespace gcx

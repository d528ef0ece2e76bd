#include "gcx/generative.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gcx/prob.hpp"

namespace gcx {

Eigen::VectorXd LatentVector::concat() const {
  Eigen::VectorXd z(total_dim());
  z.head(alpha.size()) = alpha;
  z.tail(beta.size()) = beta;
  return z;
}

// -- LinearGaussianMap ---------------------------------------------------------

LinearGaussianMap::LinearGaussianMap(Eigen::MatrixXd w_alpha,
                                     Eigen::MatrixXd w_beta, double gamma)
    : w_alpha_(std::move(w_alpha)), w_beta_(std::move(w_beta)), gamma_(gamma) {
  if (gamma_ <= 0.0 || gamma_ >= 1.0) {
    throw std::invalid_argument("LinearGaussianMap: gamma " +
                                std::to_string(gamma_) + " outside (0, 1)");
  }
  if (w_beta_.size() > 0 && w_beta_.rows() != w_alpha_.rows()) {
    throw std::invalid_argument("LinearGaussianMap: block row counts differ");
  }
  if (w_beta_.size() == 0) w_beta_.resize(w_alpha_.rows(), 0);
}

LinearGaussianMap LinearGaussianMap::random(int data_dim, int k, int l,
                                            double gamma, SeededRng& rng) {
  Eigen::MatrixXd wa = sample_std_normal_matrix(rng, data_dim, k);
  Eigen::MatrixXd wb = l > 0 ? sample_std_normal_matrix(rng, data_dim, l)
                             : Eigen::MatrixXd(data_dim, 0);
  LinearGaussianMap map(std::move(wa), std::move(wb), gamma);
  map.normalize_columns();
  return map;
}

Eigen::MatrixXd LinearGaussianMap::generate_batch(
    const Eigen::MatrixXd& z, const Eigen::MatrixXd& noise) const {
  if (z.cols() != latent_dim()) {
    throw std::invalid_argument("generate: latent width " +
                                std::to_string(z.cols()) + ", expected " +
                                std::to_string(latent_dim()));
  }
  Eigen::MatrixXd x = z.leftCols(latent_causal()) * w_alpha_.transpose();
  if (latent_noise() > 0) {
    x += z.rightCols(latent_noise()) * w_beta_.transpose();
  }
  if (noise.size() > 0) x += std::sqrt(gamma_) * noise;
  return x;
}

std::vector<ad::Var> LinearGaussianMap::bind(ad::Tape& tape) const {
  return {tape.variable(w_alpha_), tape.variable(w_beta_)};
}

ad::Var LinearGaussianMap::generate_var(ad::Tape& tape,
                                        const std::vector<ad::Var>& params,
                                        const Eigen::MatrixXd& z,
                                        const Eigen::MatrixXd& noise) const {
  ad::Var x = ad::matmul_nt(tape.constant(z.leftCols(latent_causal())), params[0]);
  if (latent_noise() > 0) {
    x = ad::add(x, ad::matmul_nt(tape.constant(z.rightCols(latent_noise())),
                                 params[1]));
  }
  if (noise.size() > 0) {
    x = ad::add(x, tape.constant((std::sqrt(gamma_) * noise).eval()));
  }
  return x;
}

std::vector<Eigen::MatrixXd*> LinearGaussianMap::params() {
  return {&w_alpha_, &w_beta_};
}

Eigen::VectorXd LinearGaussianMap::generate(const LatentVector& z,
                                            SeededRng& rng) const {
  if (z.alpha.size() != latent_causal() || z.beta.size() != latent_noise()) {
    throw std::invalid_argument("generate: latent dims (" +
                                std::to_string(z.alpha.size()) + ", " +
                                std::to_string(z.beta.size()) +
                                ") do not match map (" +
                                std::to_string(latent_causal()) + ", " +
                                std::to_string(latent_noise()) + ")");
  }
  Eigen::MatrixXd noise = sample_std_normal_matrix(rng, 1, data_dim());
  return generate_batch(z.concat().transpose(), noise).row(0);
}

void LinearGaussianMap::normalize_columns() {
  const double target = std::sqrt(1.0 - gamma_);
  auto fix = [target](Eigen::MatrixXd& w) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      const double n = w.col(c).norm();
      if (n > 0.0) w.col(c) *= target / n;
    }
  };
  fix(w_alpha_);
  fix(w_beta_);
}

Eigen::MatrixXd LinearGaussianMap::covariance() const {
  Eigen::MatrixXd cov = w_alpha_ * w_alpha_.transpose();
  if (latent_noise() > 0) cov += w_beta_ * w_beta_.transpose();
  cov += gamma_ * Eigen::MatrixXd::Identity(data_dim(), data_dim());
  return cov;
}

// -- VaeModel -------------------------------------------------------------------

VaeModel::VaeModel(int data_dim, int k, int l, const VaeArch& arch,
                   SeededRng& rng)
    : data_dim_(data_dim), k_(k), l_(l) {
  if (k + l < 1) throw std::invalid_argument("VaeModel: K + L must be >= 1");
  const int z = k + l;
  std::vector<int> enc_dims;
  enc_dims.push_back(data_dim);
  enc_dims.insert(enc_dims.end(), arch.encoder_hidden.begin(),
                  arch.encoder_hidden.end());
  // Trunk ends on the last hidden layer; heads hang off it.
  encoder_ = Mlp::make(enc_dims, rng);
  const int trunk_out = enc_dims.back();
  const double sd = std::sqrt(1.0 / trunk_out);
  mean_w_ = sd * sample_std_normal_matrix(rng, trunk_out, z);
  mean_b_ = Eigen::MatrixXd::Zero(1, z);
  logvar_w_ = sd * sample_std_normal_matrix(rng, trunk_out, z);
  logvar_b_ = Eigen::MatrixXd::Zero(1, z);

  std::vector<int> dec_dims;
  dec_dims.push_back(z);
  dec_dims.insert(dec_dims.end(), arch.decoder_hidden.begin(),
                  arch.decoder_hidden.end());
  dec_dims.push_back(data_dim);
  decoder_ = Mlp::make(dec_dims, rng);
}

namespace {

// The encoder trunk is an all-relu stack (its "output" layer is a hidden
// layer), so apply relu to the final affine as well.
Eigen::MatrixXd trunk_forward(const Mlp& trunk, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = trunk.forward_nograd(x);
  return h.cwiseMax(0.0);
}

ad::Var trunk_forward_var(const Mlp& trunk, ad::Tape& tape, ad::Var x,
                          const std::vector<ad::Var>& params) {
  return ad::relu(trunk.forward(tape, x, params));
}

}  // namespace

Eigen::MatrixXd VaeModel::decode_mean(
    const Eigen::Ref<const Eigen::MatrixXd>& z) const {
  return ad::logistic_forward(decoder_.forward_nograd(z));
}

Eigen::MatrixXd VaeModel::decode_bernoulli(
    const Eigen::Ref<const Eigen::MatrixXd>& z, SeededRng& rng) const {
  Eigen::MatrixXd p = decode_mean(z);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p.data()[i] = rng.uniform01() <= p.data()[i] ? 1.0 : 0.0;
  }
  return p;
}

Eigen::MatrixXd VaeModel::generate_batch(const Eigen::MatrixXd& z,
                                         const Eigen::MatrixXd&) const {
  if (z.cols() != k_ + l_) {
    throw std::invalid_argument("generate: latent width " +
                                std::to_string(z.cols()) + ", expected " +
                                std::to_string(k_ + l_));
  }
  return decode_mean(z);
}

std::vector<ad::Var> VaeModel::bind(ad::Tape& tape) const {
  return decoder_.bind(tape);
}

ad::Var VaeModel::generate_var(ad::Tape& tape,
                               const std::vector<ad::Var>& params,
                               const Eigen::MatrixXd& z,
                               const Eigen::MatrixXd&) const {
  return ad::logistic(decoder_.forward(tape, tape.constant(z), params));
}

std::vector<Eigen::MatrixXd*> VaeModel::params() { return decoder_.params(); }

EncodeResult VaeModel::encode(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              SeededRng& rng) const {
  if (x.cols() != data_dim_) {
    throw std::invalid_argument("encode: input width " +
                                std::to_string(x.cols()) + ", expected " +
                                std::to_string(data_dim_));
  }
  EncodeResult out;
  const Eigen::MatrixXd h = trunk_forward(encoder_, x);
  out.mean = (h * mean_w_).rowwise() + mean_b_.row(0);
  out.log_var = (h * logvar_w_).rowwise() + logvar_b_.row(0);
  const Eigen::MatrixXd eps =
      sample_std_normal_matrix(rng, x.rows(), k_ + l_);
  out.sample =
      out.mean + (out.log_var * 0.5).array().exp().matrix().cwiseProduct(eps);
  return out;
}

double VaeModel::elbo(const Eigen::Ref<const Eigen::MatrixXd>& batch,
                      SeededRng& rng, double* recon_out, double* kl_out) const {
  if (batch.minCoeff() < 0.0 || batch.maxCoeff() > 1.0) {
    throw std::invalid_argument("elbo: batch entries must lie in [0, 1]");
  }
  EncodeResult enc = encode(batch, rng);
  const Eigen::MatrixXd p = decode_mean(enc.sample);
  const double n = static_cast<double>(batch.rows());
  const Eigen::ArrayXXd pc = p.array().max(1e-12).min(1.0 - 1e-12);
  const double recon = (batch.array() * pc.log() +
                        (1.0 - batch.array()) * (1.0 - pc).log())
                           .sum() /
                       n;
  const double kl = 0.5 *
                    (enc.mean.array().square() + enc.log_var.array().exp() -
                     1.0 - enc.log_var.array())
                        .sum() /
                    n;
  if (recon_out) *recon_out = recon;
  if (kl_out) *kl_out = kl;
  return recon - kl;
}

std::vector<ad::Var> VaeModel::bind_all(ad::Tape& tape) const {
  std::vector<ad::Var> vars = encoder_.bind(tape);
  vars.push_back(tape.variable(mean_w_));
  vars.push_back(tape.variable(mean_b_));
  vars.push_back(tape.variable(logvar_w_));
  vars.push_back(tape.variable(logvar_b_));
  std::vector<ad::Var> dec = decoder_.bind(tape);
  vars.insert(vars.end(), dec.begin(), dec.end());
  return vars;
}

std::vector<Eigen::MatrixXd*> VaeModel::all_params() {
  std::vector<Eigen::MatrixXd*> out = encoder_.params();
  out.push_back(&mean_w_);
  out.push_back(&mean_b_);
  out.push_back(&logvar_w_);
  out.push_back(&logvar_b_);
  for (auto* p : decoder_.params()) out.push_back(p);
  return out;
}

ad::Var VaeModel::elbo_var(ad::Tape& tape,
                           const std::vector<ad::Var>& all_params,
                           const Eigen::MatrixXd& batch,
                           const Eigen::MatrixXd& eps) const {
  if (batch.minCoeff() < 0.0 || batch.maxCoeff() > 1.0) {
    throw std::invalid_argument("elbo: batch entries must lie in [0, 1]");
  }
  const std::size_t n_enc = encoder_.weights.size() * 2;
  const std::vector<ad::Var> enc_params(all_params.begin(),
                                        all_params.begin() + n_enc);
  const ad::Var mw = all_params[n_enc];
  const ad::Var mb = all_params[n_enc + 1];
  const ad::Var lw = all_params[n_enc + 2];
  const ad::Var lb = all_params[n_enc + 3];
  const std::vector<ad::Var> dec_params(all_params.begin() + n_enc + 4,
                                        all_params.end());

  const double n = static_cast<double>(batch.rows());
  ad::Var xb = tape.constant(batch);
  ad::Var h = trunk_forward_var(encoder_, tape, xb, enc_params);
  ad::Var mu = ad::broadcast_add_row(ad::matmul(h, mw), mb);
  ad::Var logvar = ad::broadcast_add_row(ad::matmul(h, lw), lb);
  ad::Var z = ad::add(mu, ad::cmul(ad::exp(ad::scale(logvar, 0.5)),
                                   tape.constant(eps)));
  ad::Var p = ad::logistic(decoder_.forward(tape, z, dec_params));

  ad::Var ones = tape.constant(
      Eigen::MatrixXd::Ones(batch.rows(), batch.cols()));
  ad::Var recon = ad::scale(
      ad::sum(ad::add(
          ad::cmul(xb, ad::log(ad::clamp_min(p, 1e-12))),
          ad::cmul(ad::sub(ones, xb),
                   ad::log(ad::clamp_min(ad::sub(ones, p), 1e-12))))),
      1.0 / n);

  ad::Var ones_z =
      tape.constant(Eigen::MatrixXd::Ones(batch.rows(), k_ + l_));
  ad::Var kl = ad::scale(
      ad::sum(ad::sub(ad::add(ad::cmul(mu, mu), ad::exp(logvar)),
                      ad::add(ones_z, logvar))),
      0.5 / n);
  return ad::sub(recon, kl);
}

// -- linear-Gaussian fidelity ----------------------------------------------------

double lingauss_fidelity(const LinearGaussianMap& map,
                         const Eigen::MatrixXd& data_cov) {
  const Eigen::Index n = data_cov.rows();
  const Eigen::MatrixXd cov = map.covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("lingauss_fidelity: model covariance not PD");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(L(i, i));
  const double tr = llt.solve(data_cov).trace();
  return -0.5 * (tr - static_cast<double>(n) + logdet);
}

Eigen::MatrixXd lingauss_fidelity_grad(const LinearGaussianMap& map,
                                       const Eigen::MatrixXd& data_cov) {
  const Eigen::Index n = data_cov.rows();
  const Eigen::MatrixXd cov = map.covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  // d/dSigma of fidelity = 0.5 (Sigma^-1 Sd Sigma^-1 - Sigma^-1); the chain
  // through Sigma = W W^T + gamma I doubles the symmetric part.
  const Eigen::MatrixXd dsig = 0.5 * (inv * data_cov * inv - inv);
  Eigen::MatrixXd w(map.data_dim(), map.latent_dim());
  w.leftCols(map.latent_causal()) = map.w_alpha();
  if (map.latent_noise() > 0) w.rightCols(map.latent_noise()) = map.w_beta();
  return 2.0 * dsig * w;
}

double lingauss_best_fidelity(const Eigen::MatrixXd& data_cov, int n_factors,
                              double gamma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data_cov);
  Eigen::VectorXd lam = es.eigenvalues();
  std::sort(lam.data(), lam.data() + lam.size(),
            [](double a, double b) { return a > b; });
  double value = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    // The i-th model eigenvalue is matched (floored at gamma) when a factor
    // is spent on this direction, gamma otherwise.
    const double lm = i < n_factors ? std::max(lam[i], gamma) : gamma;
    value += lam[i] / lm - 1.0 + std::log(lm);
  }
  return -0.5 * value;
}

}  // namespace gcx

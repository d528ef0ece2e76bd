#include "gcx/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gcx/prob.hpp"

namespace gcx {

void adam_step(const std::vector<Eigen::MatrixXd*>& params,
               const std::vector<Eigen::MatrixXd>& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: " + std::to_string(params.size()) +
                                " params vs " + std::to_string(grads.size()) +
                                " grads");
  }
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      state.v.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i];
    const Eigen::MatrixXd& g = grads[i];
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw std::invalid_argument(
          "adam_step: param " + std::to_string(i) + " is " +
          std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
          " but grad is " + std::to_string(g.rows()) + "x" +
          std::to_string(g.cols()));
    }
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd mhat = state.m[i].array() / bc1;
    const Eigen::ArrayXXd vhat = state.v[i].array() / bc2;
    p.array() += lr * mhat / (vhat.sqrt() + eps);
  }
}

namespace {

Eigen::MatrixXd effective_cov(const Eigen::MatrixXd& data_cov, int dim) {
  if (data_cov.size() == 0) return Eigen::MatrixXd::Identity(dim, dim);
  if (data_cov.rows() != dim || data_cov.cols() != dim) {
    throw std::invalid_argument("data covariance has wrong dimension");
  }
  return data_cov;
}

double wall_seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

ObjectiveValue combined_objective(const LinearGaussianMap& g,
                                  const Classifier& f, const TrainConfig& cfg,
                                  SeededRng& rng,
                                  const Eigen::MatrixXd& data_cov) {
  const Eigen::MatrixXd cov = effective_cov(data_cov, g.data_dim());
  ObjectiveValue out;
  out.c_term = estimate_influence(g, f, cfg.variant, cfg.n_alpha, cfg.n_beta,
                                  rng, cfg.n_x)
                   .value;
  out.d_term = lingauss_fidelity(g, cov);
  out.total = out.c_term + cfg.lambda * out.d_term;
  return out;
}

ObjectiveValue combined_objective(const VaeModel& g, const Classifier& f,
                                  const TrainConfig& cfg, SeededRng& rng,
                                  const Eigen::MatrixXd& batch) {
  if (batch.rows() == 0) {
    throw std::invalid_argument("combined_objective: VAE needs a data batch");
  }
  ObjectiveValue out;
  SeededRng c_rng = rng.split(0);
  SeededRng e_rng = rng.split(1);
  out.c_term = estimate_influence(g, f, cfg.variant, cfg.n_alpha, cfg.n_beta,
                                  c_rng, cfg.n_x)
                   .value;
  out.d_term = g.elbo(batch, e_rng);
  out.total = out.c_term + cfg.lambda * out.d_term;
  return out;
}

std::pair<LinearGaussianMap, TrainTrace> train_lingauss_explainer(
    const Classifier& f, const TrainConfig& cfg,
    const Eigen::MatrixXd& data_cov) {
  const int dim = f.input_dim();
  const Eigen::MatrixXd cov = effective_cov(data_cov, dim);
  SeededRng rng(cfg.seed, 101);
  LinearGaussianMap map = LinearGaussianMap::random(
      dim, cfg.latent_causal, cfg.latent_noise, cfg.gamma, rng);

  AdamState adam;
  TrainTrace trace;
  const auto start = std::chrono::steady_clock::now();
  for (int step = 0; step < cfg.steps; ++step) {
    SeededRng step_rng = rng.split(static_cast<std::uint64_t>(step) + 7);
    const InfluenceGrid grid = make_influence_grid(
        map, cfg.variant, cfg.n_alpha, cfg.n_beta, cfg.n_x, step_rng);

    ad::Tape tape;
    const std::vector<ad::Var> params = map.bind(tape);
    const ad::Var c = influence_var(tape, map, params, f, grid);
    tape.backward(c);

    const double c_val = tape.value(c)(0, 0);
    const double d_val = lingauss_fidelity(map, cov);
    const double total = c_val + cfg.lambda * d_val;
    if (!std::isfinite(total)) {
      throw std::runtime_error("training diverged at step " +
                               std::to_string(step));
    }

    const Eigen::MatrixXd d_grad =
        cfg.lambda * lingauss_fidelity_grad(map, cov);
    std::vector<Eigen::MatrixXd> grads = {
        tape.grad(params[0]) + d_grad.leftCols(cfg.latent_causal),
        tape.grad(params[1]) + d_grad.rightCols(cfg.latent_noise)};
    adam_step(map.params(), grads, adam, cfg.learning_rate, cfg.adam_beta1,
              cfg.adam_beta2, cfg.adam_eps);
    map.normalize_columns();

    if (step % cfg.trace_every == 0 || step + 1 == cfg.steps) {
      trace.rows.push_back(
          {step, c_val, d_val, total, wall_seconds_since(start)});
    }
    trace.final_c = c_val;
    trace.final_d = d_val;
  }
  return {std::move(map), std::move(trace)};
}

std::pair<VaeModel, TrainTrace> train_vae_explainer(const Classifier* f,
                                                    const Dataset& data,
                                                    const TrainConfig& cfg,
                                                    const VaeArch& arch,
                                                    bool fidelity_only) {
  if (!fidelity_only && f == nullptr) {
    throw std::invalid_argument("train_vae_explainer: classifier required");
  }
  if (!fidelity_only && cfg.latent_causal < 1) {
    throw std::invalid_argument(
        "train_vae_explainer: need K >= 1 to train the influence term");
  }
  if (data.size() == 0) {
    throw std::invalid_argument("train_vae_explainer: empty dataset");
  }
  SeededRng rng(cfg.seed, 202);
  SeededRng init_rng = rng.split(0);
  VaeModel vae(static_cast<int>(data.dim()), cfg.latent_causal,
               cfg.latent_noise, arch, init_rng);
  const int zdim = cfg.latent_causal + cfg.latent_noise;

  AdamState adam;
  TrainTrace trace;
  SeededRng batch_rng = rng.split(1);
  const auto start = std::chrono::steady_clock::now();

  for (int step = 0; step < cfg.steps; ++step) {
    SeededRng step_rng = rng.split(static_cast<std::uint64_t>(step) + 7);
    const Eigen::Index bs =
        std::min<Eigen::Index>(cfg.batch_size, data.size());
    Eigen::MatrixXd batch(bs, data.dim());
    for (Eigen::Index i = 0; i < bs; ++i) {
      batch.row(i) = data.x.row(static_cast<Eigen::Index>(
          batch_rng.next_u64() % static_cast<std::uint64_t>(data.size())));
    }
    const Eigen::MatrixXd eps = sample_std_normal_matrix(
        step_rng, bs, zdim);

    ad::Tape tape;
    const std::vector<ad::Var> all_params = vae.bind_all(tape);
    const ad::Var elbo = vae.elbo_var(tape, all_params, batch, eps);

    double c_val = 0.0;
    ad::Var total{nullptr, -1};
    if (fidelity_only) {
      total = ad::scale(elbo, cfg.lambda > 0.0 ? cfg.lambda : 1.0);
    } else {
      const std::size_t n_dec = vae.decoder_.weights.size() * 2;
      const std::vector<ad::Var> dec_params(all_params.end() - n_dec,
                                            all_params.end());
      SeededRng c_rng = step_rng.split(99);
      const InfluenceGrid grid = make_influence_grid(
          vae, cfg.variant, cfg.n_alpha, cfg.n_beta, cfg.n_x, c_rng);
      const ad::Var c = influence_var(tape, vae, dec_params, *f, grid);
      c_val = tape.value(c)(0, 0);
      total = ad::add(c, ad::scale(elbo, cfg.lambda));
    }
    tape.backward(total);

    const double d_val = tape.value(elbo)(0, 0);
    const double total_val = tape.value(total)(0, 0);
    if (!std::isfinite(total_val)) {
      throw std::runtime_error("training diverged at step " +
                               std::to_string(step));
    }

    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(all_params.size());
    for (const ad::Var& p : all_params) grads.push_back(tape.grad(p));
    adam_step(vae.all_params(), grads, adam, cfg.learning_rate, cfg.adam_beta1,
              cfg.adam_beta2, cfg.adam_eps);

    if (step % cfg.trace_every == 0 || step + 1 == cfg.steps) {
      trace.rows.push_back(
          {step, c_val, d_val, c_val + cfg.lambda * d_val,
           wall_seconds_since(start)});
    }
    trace.final_c = c_val;
    trace.final_d = d_val;
  }
  return {std::move(vae), std::move(trace)};
}

}  // namespace gcx

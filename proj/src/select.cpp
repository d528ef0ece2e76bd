#include "gcx/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gcx/influence.hpp"
#include "gcx/prob.hpp"

namespace gcx {

// -- backends --------------------------------------------------------------------

LingaussSelectionBackend::LingaussSelectionBackend(const Classifier& f,
                                                   Eigen::MatrixXd data_cov,
                                                   TrainConfig base_cfg,
                                                   int eval_n_alpha,
                                                   int eval_n_beta)
    : f_(f),
      data_cov_(std::move(data_cov)),
      base_(base_cfg),
      eval_n_alpha_(eval_n_alpha),
      eval_n_beta_(eval_n_beta) {
  if (data_cov_.size() == 0) {
    data_cov_ = Eigen::MatrixXd::Identity(f.input_dim(), f.input_dim());
  }
}

double LingaussSelectionBackend::fidelity_only(int n_factors) {
  // The fidelity-optimal linear map is available in closed form.
  return lingauss_best_fidelity(data_cov_, n_factors, base_.gamma);
}

std::pair<double, double> LingaussSelectionBackend::fit(int k, int l,
                                                        double lambda) {
  TrainConfig cfg = base_;
  cfg.latent_causal = k;
  cfg.latent_noise = l;
  cfg.lambda = lambda;
  auto [map, trace] = train_lingauss_explainer(f_, cfg, data_cov_);
  SeededRng eval_rng(cfg.seed ^ 0xE5A1ull, 3);
  const double c = estimate_influence(map, f_, cfg.variant, eval_n_alpha_,
                                      eval_n_beta_, eval_rng, cfg.n_x)
                       .value;
  return {c, lingauss_fidelity(map, data_cov_)};
}

VaeSelectionBackend::VaeSelectionBackend(const Classifier& f,
                                         const Dataset& data,
                                         TrainConfig base_cfg, VaeArch arch,
                                         int fidelity_steps, int eval_n_alpha,
                                         int eval_n_beta, int eval_batch)
    : f_(f),
      data_(data),
      base_(base_cfg),
      arch_(std::move(arch)),
      fidelity_steps_(fidelity_steps > 0 ? fidelity_steps : base_cfg.steps),
      eval_n_alpha_(eval_n_alpha),
      eval_n_beta_(eval_n_beta),
      eval_batch_(eval_batch) {}

Eigen::MatrixXd VaeSelectionBackend::eval_batch_rows() const {
  const Eigen::Index n =
      std::min<Eigen::Index>(eval_batch_, data_.size());
  return data_.x.topRows(n);
}

double VaeSelectionBackend::fidelity_only(int n_factors) {
  TrainConfig cfg = base_;
  cfg.latent_causal = 0;
  cfg.latent_noise = n_factors;
  cfg.lambda = 0.0;
  cfg.steps = fidelity_steps_;
  auto [vae, trace] = train_vae_explainer(nullptr, data_, cfg, arch_,
                                          /*fidelity_only=*/true);
  SeededRng eval_rng(cfg.seed ^ 0xD0ull, 4);
  return vae.elbo(eval_batch_rows(), eval_rng);
}

std::pair<double, double> VaeSelectionBackend::fit(int k, int l,
                                                   double lambda) {
  TrainConfig cfg = base_;
  cfg.latent_causal = k;
  cfg.latent_noise = l;
  cfg.lambda = lambda;
  auto [vae, trace] = train_vae_explainer(&f_, data_, cfg, arch_);
  SeededRng eval_rng(cfg.seed ^ 0xE5A1ull, 3);
  SeededRng c_rng = eval_rng.split(0);
  SeededRng e_rng = eval_rng.split(1);
  const double c = estimate_influence(vae, f_, cfg.variant, eval_n_alpha_,
                                      eval_n_beta_, c_rng, cfg.n_x)
                       .value;
  return {c, vae.elbo(eval_batch_rows(), e_rng)};
}

// -- budget scan -------------------------------------------------------------------

int select_latent_budget(SelectionBackend& backend, const SelectionConfig& cfg,
                         SelectionTrace* trace_out) {
  if (cfg.plateau_eps_d <= 0.0) {
    throw std::invalid_argument("select_latent_budget: plateau_eps must be > 0");
  }
  SelectionTrace trace;
  trace.config = cfg;
  double prev = 0.0;
  double first = 0.0;
  int chosen = cfg.l_max;
  bool found = false;
  for (int l = 1; l <= cfg.l_max; ++l) {
    const double d = backend.fidelity_only(l);
    trace.budget_scan.push_back({l, d});
    if (l == 1) {
      first = d;
    } else {
      const double improvement = d - prev;
      const double span = std::max(d - first, 1e-9);
      if (improvement / span < cfg.plateau_eps_d) {
        chosen = l - 1;
        found = true;
        break;
      }
    }
    prev = d;
  }
  trace.budget_plateau_found = found;
  trace.l_total = chosen;
  trace.d_reference = trace.budget_scan[static_cast<std::size_t>(chosen - 1)].d_value;
  if (trace_out) *trace_out = trace;
  return chosen;
}

// -- staged search -----------------------------------------------------------------

namespace {

/// C-plateau test shared by the live search and the trace replay: the gain
/// over the previous iterate (0 before the first) must clear a relative
/// threshold with an absolute scale floor.
bool c_plateaued(double c_prev, double c_now, const SelectionConfig& cfg) {
  const double gain = c_now - c_prev;
  return gain < cfg.plateau_eps_c * std::max(std::abs(c_prev), cfg.c_floor);
}

bool fidelity_ok(double d, double d_ref, const SelectionConfig& cfg) {
  const double slack =
      std::max(cfg.fidelity_slack * std::abs(d_ref), cfg.fidelity_slack_abs);
  return d >= d_ref - slack;
}

}  // namespace

SelectionResult select_params(SelectionBackend& backend,
                              const SelectionConfig& cfg) {
  SelectionTrace trace;
  const int l_total = select_latent_budget(backend, cfg, &trace);

  double c_prev = 0.0;
  for (int k = 1; k <= l_total; ++k) {
    const int l = l_total - k;
    SelectionIterate it;
    it.k = k;
    it.l = l;
    double best_d = -std::numeric_limits<double>::infinity();
    double best_lambda = cfg.lambda_base;
    double best_c = 0.0;
    bool met = false;
    for (int j = 0; j <= cfg.lambda_ladder_max; ++j) {
      const double lambda = cfg.lambda_base * std::pow(2.0, j);
      const auto [c, d] = backend.fit(k, l, lambda);
      if (d > best_d) {
        best_d = d;
        best_lambda = lambda;
        best_c = c;
      }
      if (fidelity_ok(d, trace.d_reference, cfg)) {
        it.lambda = lambda;
        it.c_value = c;
        it.d_value = d;
        met = true;
        break;
      }
    }
    if (!met) {
      it.lambda = best_lambda;
      it.c_value = best_c;
      it.d_value = best_d;
      it.fidelity_met = false;
    }
    trace.iterates.push_back(it);
    if (c_plateaued(c_prev, it.c_value, cfg)) break;
    c_prev = it.c_value;
  }
  return decide_selection(trace);
}

SelectionResult decide_selection(const SelectionTrace& trace) {
  if (trace.iterates.empty()) {
    throw std::invalid_argument("decide_selection: empty trace");
  }
  const SelectionConfig& cfg = trace.config;
  SelectionResult out;
  out.trace = trace;

  double c_prev = 0.0;
  std::size_t chosen = trace.iterates.size() - 1;
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    if (c_plateaued(c_prev, trace.iterates[i].c_value, cfg)) {
      // the configuration immediately before the plateau wins; a plateau on
      // the very first iterate keeps it (flagged)
      chosen = i == 0 ? 0 : i - 1;
      out.trace.plateau_at_first = i == 0;
      break;
    }
    c_prev = trace.iterates[i].c_value;
  }
  const SelectionIterate& it = trace.iterates[chosen];
  out.k = it.k;
  out.l = it.l;
  out.lambda = it.lambda;
  return out;
}

}  // namespace gcx

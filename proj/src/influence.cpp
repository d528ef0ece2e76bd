#include "gcx/influence.hpp"

#include <cmath>
#include <stdexcept>

#include "gcx/prob.hpp"

namespace gcx {

namespace {

constexpr double kProbFloor = 1e-12;  // keeps p log p finite under sampling

void check_causal_request(const Generator& g) {
  if (g.latent_causal() == 0) {
    throw std::invalid_argument(
        "influence: generator has no causal factors (K = 0)");
  }
}

/// Z rows for one block. `outer_cols` are redrawn once per outer index,
/// `inner_cols` once per (outer, inner) pair; every (outer, inner) pair is
/// replicated n_x times.
Eigen::MatrixXd build_block(int latent_dim, const std::vector<int>& outer_cols,
                            const std::vector<int>& inner_cols, int n_outer,
                            int n_inner, int n_x, SeededRng& outer_rng,
                            SeededRng& inner_rng) {
  const Eigen::Index rows =
      static_cast<Eigen::Index>(n_outer) * n_inner * n_x;
  Eigen::MatrixXd z(rows, latent_dim);
  Eigen::VectorXd outer_draw(static_cast<Eigen::Index>(outer_cols.size()));
  Eigen::VectorXd inner_draw(static_cast<Eigen::Index>(inner_cols.size()));
  Eigen::Index r = 0;
  for (int o = 0; o < n_outer; ++o) {
    for (Eigen::Index c = 0; c < outer_draw.size(); ++c) {
      outer_draw[c] = outer_rng.normal();
    }
    for (int i = 0; i < n_inner; ++i) {
      for (Eigen::Index c = 0; c < inner_draw.size(); ++c) {
        inner_draw[c] = inner_rng.normal();
      }
      for (int n = 0; n < n_x; ++n, ++r) {
        for (std::size_t c = 0; c < outer_cols.size(); ++c) {
          z(r, outer_cols[c]) = outer_draw[static_cast<Eigen::Index>(c)];
        }
        for (std::size_t c = 0; c < inner_cols.size(); ++c) {
          z(r, inner_cols[c]) = inner_draw[static_cast<Eigen::Index>(c)];
        }
      }
    }
  }
  return z;
}

std::vector<int> range_cols(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return v;
}

/// MI arithmetic shared by both grouping patterns. P holds classifier rows
/// grouped outer-major. Returns the influence node; when `terms` is given it
/// also receives (T1, T2) with C = T1 - T2.
ad::Var influence_from_probs(ad::Tape& tape, ad::Var probs,
                             const InfluenceGrid& grid,
                             std::pair<ad::Var, ad::Var>* terms = nullptr) {
  ad::Var t1{nullptr, -1}, t2{nullptr, -1};
  if (!grid.conditional) {
    // class posterior per outer draw, averaged over the inner marginal
    ad::Var pa = ad::rows_block_mean(probs, grid.n_inner * grid.n_x);
    t1 = ad::scale(ad::sum(ad::cmul(pa, ad::log(ad::clamp_min(pa, kProbFloor)))),
                   1.0 / grid.n_outer);
    ad::Var q = ad::rows_block_mean(pa, grid.n_outer);
    t2 = ad::sum(ad::cmul(q, ad::log(ad::clamp_min(q, kProbFloor))));
  } else {
    // per (outer, inner) posterior; entropies aggregated inside each outer
    // group, then averaged over the clamped outer draws
    ad::Var pa = ad::rows_block_mean(probs, grid.n_x);
    t1 = ad::scale(ad::sum(ad::cmul(pa, ad::log(ad::clamp_min(pa, kProbFloor)))),
                   1.0 / (static_cast<double>(grid.n_outer) * grid.n_inner));
    ad::Var q = ad::rows_block_mean(pa, grid.n_inner);
    t2 = ad::scale(ad::sum(ad::cmul(q, ad::log(ad::clamp_min(q, kProbFloor)))),
                   1.0 / grid.n_outer);
  }
  if (terms) *terms = {t1, t2};
  return ad::sub(t1, t2);
}

}  // namespace

std::string to_string(InfluenceVariant v) {
  switch (v) {
    case InfluenceVariant::kJoint:
      return "joint";
    case InfluenceVariant::kIndependentUnconditional:
      return "independent-unconditional";
    case InfluenceVariant::kIndependentConditional:
      return "independent-conditional";
    case InfluenceVariant::kJointConditional:
      return "joint-conditional";
  }
  return "joint";
}

InfluenceVariant influence_variant_from_string(const std::string& s) {
  if (s == "joint") return InfluenceVariant::kJoint;
  if (s == "independent-unconditional")
    return InfluenceVariant::kIndependentUnconditional;
  if (s == "independent-conditional")
    return InfluenceVariant::kIndependentConditional;
  if (s == "joint-conditional") return InfluenceVariant::kJointConditional;
  throw std::invalid_argument("unknown influence variant: " + s);
}

InfluenceGrid make_influence_grid(const Generator& g, InfluenceVariant variant,
                                  int n_alpha, int n_beta, int n_x,
                                  SeededRng& rng) {
  check_causal_request(g);
  if (n_alpha < 1 || n_beta < 1 || n_x < 1) {
    throw std::invalid_argument("influence: sample counts must be >= 1");
  }
  const int k = g.latent_causal();
  const int l = g.latent_noise();
  const int zdim = k + l;
  SeededRng alpha_rng = rng.split(0);
  SeededRng beta_rng = rng.split(1);
  SeededRng noise_rng = rng.split(2);

  InfluenceGrid grid;
  grid.variant = variant;
  grid.n_x = n_x;
  grid.seed = rng.seed();
  const std::vector<int> alpha_cols = range_cols(0, k);
  const std::vector<int> beta_cols = range_cols(k, zdim);

  switch (variant) {
    case InfluenceVariant::kJoint: {
      grid.n_outer = n_alpha;
      grid.n_inner = n_beta;
      grid.conditional = false;
      grid.z_blocks.push_back(build_block(zdim, alpha_cols, beta_cols, n_alpha,
                                          n_beta, n_x, alpha_rng, beta_rng));
      break;
    }
    case InfluenceVariant::kIndependentUnconditional: {
      grid.n_outer = n_alpha;
      grid.n_inner = n_beta;
      grid.conditional = false;
      for (int f = 0; f < k; ++f) {
        std::vector<int> rest;
        for (int c = 0; c < zdim; ++c) {
          if (c != f) rest.push_back(c);
        }
        grid.z_blocks.push_back(build_block(zdim, {f}, rest, n_alpha, n_beta,
                                            n_x, alpha_rng, beta_rng));
      }
      break;
    }
    case InfluenceVariant::kJointConditional: {
      grid.n_outer = n_beta;
      grid.n_inner = n_alpha;
      grid.conditional = true;
      grid.z_blocks.push_back(build_block(zdim, beta_cols, alpha_cols, n_beta,
                                          n_alpha, n_x, beta_rng, alpha_rng));
      break;
    }
    case InfluenceVariant::kIndependentConditional: {
      grid.n_outer = n_beta;
      grid.n_inner = n_alpha;
      grid.conditional = true;
      for (int f = 0; f < k; ++f) {
        std::vector<int> rest;
        for (int c = 0; c < zdim; ++c) {
          if (c != f) rest.push_back(c);
        }
        grid.z_blocks.push_back(build_block(zdim, rest, {f}, n_beta, n_alpha,
                                            n_x, beta_rng, alpha_rng));
      }
      break;
    }
  }
  if (g.wants_noise()) {
    for (const auto& z : grid.z_blocks) {
      grid.noise_blocks.push_back(
          sample_std_normal_matrix(noise_rng, z.rows(), g.data_dim()));
    }
  } else {
    grid.noise_blocks.assign(grid.z_blocks.size(), Eigen::MatrixXd());
  }
  return grid;
}

ad::Var influence_var(ad::Tape& tape, const Generator& g,
                      const std::vector<ad::Var>& params, const Classifier& f,
                      const InfluenceGrid& grid) {
  if (f.input_dim() != g.data_dim()) {
    throw std::invalid_argument("influence: generator emits " +
                                std::to_string(g.data_dim()) +
                                "-dim samples but classifier expects " +
                                std::to_string(f.input_dim()));
  }
  ad::Var acc{nullptr, -1};
  for (std::size_t b = 0; b < grid.z_blocks.size(); ++b) {
    ad::Var x = g.generate_var(tape, params, grid.z_blocks[b],
                               grid.noise_blocks[b]);
    ad::Var probs = classifier_probs(tape, f, x);
    ad::Var c = influence_from_probs(tape, probs, grid);
    acc = b == 0 ? c : ad::add(acc, c);
  }
  if (grid.z_blocks.size() > 1) {
    acc = ad::scale(acc, 1.0 / static_cast<double>(grid.z_blocks.size()));
  }
  return acc;
}

InfluenceEstimate estimate_influence(const Generator& g, const Classifier& f,
                                     InfluenceVariant variant, int n_alpha,
                                     int n_beta, SeededRng& rng, int n_x) {
  const InfluenceGrid grid =
      make_influence_grid(g, variant, n_alpha, n_beta, n_x, rng);
  ad::Tape tape;
  const std::vector<ad::Var> params = g.bind(tape);
  const ad::Var c = influence_var(tape, g, params, f, grid);
  InfluenceEstimate out;
  out.value = tape.value(c)(0, 0);
  out.variant = variant;
  out.n_alpha = n_alpha;
  out.n_beta = n_beta;
  out.n_x = n_x;
  out.seed = grid.seed;
  return out;
}

std::pair<double, double> decomposition_terms(const Generator& g,
                                              const Classifier& f, int n_alpha,
                                              int n_beta, SeededRng& rng,
                                              int n_x) {
  const InfluenceGrid grid = make_influence_grid(
      g, InfluenceVariant::kJoint, n_alpha, n_beta, n_x, rng);
  ad::Tape tape;
  const std::vector<ad::Var> params = g.bind(tape);
  ad::Var x = g.generate_var(tape, params, grid.z_blocks[0],
                             grid.noise_blocks[0]);
  ad::Var probs = classifier_probs(tape, f, x);
  std::pair<ad::Var, ad::Var> terms{{nullptr, -1}, {nullptr, -1}};
  influence_from_probs(tape, probs, grid, &terms);
  const double t1 = tape.value(terms.first)(0, 0);
  const double t2 = tape.value(terms.second)(0, 0);
  return {-t2, -t1};  // (H(Y), E_alpha[H(Y|alpha)])
}

Eigen::VectorXd per_factor_information_flow(const Generator& g,
                                            const Classifier& f, int n_alpha,
                                            int n_beta, SeededRng& rng,
                                            int n_x) {
  const int k = g.latent_causal();
  const int l = g.latent_noise();
  const int zdim = k + l;
  Eigen::VectorXd flows(zdim);
  for (int factor = 0; factor < zdim; ++factor) {
    SeededRng outer_rng = rng.split(2 * static_cast<std::uint64_t>(factor));
    SeededRng inner_rng =
        rng.split(2 * static_cast<std::uint64_t>(factor) + 1);
    std::vector<int> rest;
    for (int c = 0; c < zdim; ++c) {
      if (c != factor) rest.push_back(c);
    }
    InfluenceGrid grid;
    grid.variant = InfluenceVariant::kIndependentUnconditional;
    grid.n_outer = n_alpha;
    grid.n_inner = n_beta;
    grid.n_x = n_x;
    grid.conditional = false;
    grid.seed = rng.seed();
    grid.z_blocks.push_back(build_block(zdim, {factor}, rest, n_alpha, n_beta,
                                        n_x, outer_rng, inner_rng));
    if (g.wants_noise()) {
      SeededRng noise_rng =
          rng.split(1000 + static_cast<std::uint64_t>(factor));
      grid.noise_blocks.push_back(sample_std_normal_matrix(
          noise_rng, grid.z_blocks[0].rows(), g.data_dim()));
    } else {
      grid.noise_blocks.emplace_back();
    }
    ad::Tape tape;
    const std::vector<ad::Var> params = g.bind(tape);
    flows[factor] = tape.value(influence_var(tape, g, params, f, grid))(0, 0);
  }
  return flows;
}

}  // namespace gcx

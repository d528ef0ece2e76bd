#include "gcx/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gcx/prob.hpp"

namespace gcx {

SweepGrid latent_sweep(const Generator& g, const Classifier& f,
                       const Eigen::MatrixXd& anchors, int factor,
                       double range, int steps) {
  if (factor < 0 || factor >= g.latent_dim()) {
    throw std::invalid_argument("latent_sweep: factor " +
                                std::to_string(factor) + " outside [0, " +
                                std::to_string(g.latent_dim()) + ")");
  }
  if (anchors.cols() != g.latent_dim()) {
    throw std::invalid_argument("latent_sweep: anchors have wrong width");
  }
  if (steps < 1) throw std::invalid_argument("latent_sweep: steps < 1");

  SweepGrid grid;
  grid.factor = factor;
  grid.anchors = anchors;
  grid.offsets.resize(steps);
  for (int s = 0; s < steps; ++s) {
    grid.offsets[s] =
        steps == 1 ? 0.0
                   : -range + 2.0 * range * static_cast<double>(s) /
                                  static_cast<double>(steps - 1);
  }
  const Eigen::MatrixXd no_noise;  // traversals decode deterministically
  for (Eigen::Index a = 0; a < anchors.rows(); ++a) {
    Eigen::MatrixXd z = anchors.row(a).replicate(steps, 1);
    for (int s = 0; s < steps; ++s) z(s, factor) += grid.offsets[s];
    Eigen::MatrixXd x = g.generate_batch(z, no_noise);
    grid.probs.push_back(f.predict_proba_batch(x));
    grid.decoded.push_back(std::move(x));
  }
  return grid;
}

// -- angle landscape -------------------------------------------------------------

namespace {

Eigen::VectorXd unit_at_deg(double deg) {
  const double rad = deg * M_PI / 180.0;
  Eigen::VectorXd v(2);
  v << std::cos(rad), std::sin(rad);
  return v;
}

}  // namespace

std::pair<int, int> AngleLandscape::argmax_combined(InfluenceVariant v,
                                                    double lambda) const {
  const Eigen::MatrixXd total = influence.at(v) + lambda * fidelity;
  int best_r = 0, best_c = 0;
  double best = total(0, 0);
  for (Eigen::Index r = 0; r < total.rows(); ++r) {
    for (Eigen::Index c = 0; c < total.cols(); ++c) {
      if (total(r, c) > best) {
        best = total(r, c);
        best_r = static_cast<int>(r);
        best_c = static_cast<int>(c);
      }
    }
  }
  return {best_r, best_c};
}

AngleLandscape angle_landscape(const LandscapeConfig& cfg, SeededRng& rng) {
  const int n = static_cast<int>(std::lround(180.0 / cfg.grid_step_deg));
  AngleLandscape out;
  out.thetas_deg.resize(n);
  for (int i = 0; i < n; ++i) out.thetas_deg[i] = i * cfg.grid_step_deg;
  for (InfluenceVariant v : cfg.variants) {
    out.influence[v] = Eigen::MatrixXd::Zero(n, n);
  }
  out.marginal_entropy = Eigen::MatrixXd::Zero(n, n);
  out.fidelity = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd a1(2), a2(2);
  a1 << 1.0, 0.0;
  a2 << 0.0, 1.0;
  const LinearSigmoidClassifier single(a1, SigmoidKind::kLogistic,
                                       cfg.steepness);
  const AndClassifier both(a1, a2, cfg.steepness);
  const Classifier& f =
      cfg.kind == LandscapeKind::kSingleHyperplane
          ? static_cast<const Classifier&>(single)
          : static_cast<const Classifier&>(both);

  const Eigen::MatrixXd iso = Eigen::MatrixXd::Identity(2, 2);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Eigen::MatrixXd w1 = unit_at_deg(out.thetas_deg[r]);
      Eigen::MatrixXd w2 = unit_at_deg(out.thetas_deg[c]);
      // column roles: single hyperplane = (w_alpha, w_beta); quadrant
      // classifier = two causal columns
      LinearGaussianMap map =
          cfg.kind == LandscapeKind::kSingleHyperplane
              ? LinearGaussianMap(w1, w2, cfg.gamma)
              : LinearGaussianMap((Eigen::MatrixXd(2, 2) << w1, w2).finished(),
                                  Eigen::MatrixXd(2, 0), cfg.gamma);
      map.normalize_columns();

      // common random numbers across cells stabilize the argmax comparison
      for (InfluenceVariant v : cfg.variants) {
        SeededRng cell_rng = rng.split(1 + static_cast<std::uint64_t>(v));
        out.influence[v](r, c) =
            estimate_influence(map, f, v, cfg.n_alpha, cfg.n_beta, cell_rng)
                .value;
      }
      if (cfg.kind == LandscapeKind::kSingleHyperplane) {
        SeededRng cell_rng = rng.split(997);
        const auto terms = decomposition_terms(map, f, cfg.n_alpha, cfg.n_beta,
                                               cell_rng);
        out.marginal_entropy(r, c) = terms.first;
      }
      out.fidelity(r, c) = lingauss_fidelity(map, iso);
    }
  }
  return out;
}

// -- interventions ---------------------------------------------------------------

InterventionResult intervention_accuracy_drop(const VaeModel& g,
                                              const Classifier& f,
                                              const Dataset& validation,
                                              int factor, SeededRng& rng) {
  if (factor < 0 || factor >= g.latent_dim()) {
    throw std::invalid_argument("intervention: factor index out of range");
  }
  if (validation.size() == 0) {
    throw std::invalid_argument("intervention: empty validation set");
  }
  InterventionResult out;
  out.original_accuracy = classifier_accuracy(f, validation);

  SeededRng enc_rng = rng.split(0);
  const EncodeResult enc = g.encode(validation.x, enc_rng);
  Dataset reencoded;
  reencoded.x = g.decode_mean(enc.mean);
  reencoded.labels = validation.labels;
  reencoded.num_classes = validation.num_classes;
  out.reencoded_accuracy = classifier_accuracy(f, reencoded);

  SeededRng draw_rng = rng.split(1);
  Eigen::MatrixXd z = enc.mean;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z(i, factor) = draw_rng.normal();
  }
  Dataset intervened;
  intervened.x = g.decode_mean(z);
  intervened.labels = validation.labels;
  intervened.num_classes = validation.num_classes;
  out.intervened_accuracy = classifier_accuracy(f, intervened);
  return out;
}

// -- capacity certificate ----------------------------------------------------------

double capacity_certificate(double mi_nats, int num_classes) {
  if (num_classes < 2) {
    throw std::invalid_argument("capacity_certificate: need >= 2 classes");
  }
  const double ln_m = std::log(static_cast<double>(num_classes));
  if (mi_nats < -1e-12 || mi_nats > ln_m + 1e-12) {
    throw std::invalid_argument(
        "capacity_certificate: mutual information " + std::to_string(mi_nats) +
        " nats outside [0, ln " + std::to_string(num_classes) + "]");
  }
  const double log2_m = std::log2(static_cast<double>(num_classes));
  const double h_bits =
      std::max(0.0, std::min(log2_m, log2_m - mi_nats / std::log(2.0)));

  // Walk the envelope segments ((m-1)/m, log2 m) -> (m/(m+1), log2(m+1))
  // and invert the one containing h_bits.
  for (int m = 1; m < num_classes; ++m) {
    const double h_lo = std::log2(static_cast<double>(m));
    const double h_hi = std::log2(static_cast<double>(m + 1));
    if (h_bits <= h_hi || m + 1 == num_classes) {
      const double e_lo = static_cast<double>(m - 1) / m;
      const double e_hi = static_cast<double>(m) / (m + 1);
      const double t = (h_bits - h_lo) / (h_hi - h_lo);
      return e_lo + t * (e_hi - e_lo);
    }
  }
  return 0.0;  // num_classes == 1 cannot reach here
}

}  // namespace gcx

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "gcx/classifiers.hpp"
#include "gcx/data.hpp"
#include "gcx/training.hpp"

namespace gcx {

/// Drives the staged parameter search: a backend knows how to train its
/// generative map with the fidelity term alone (for the budget scan) and
/// with the full objective at a given (K, L, lambda).
class SelectionBackend {
 public:
  virtual ~SelectionBackend() = default;
  /// Best fidelity achievable with n latent factors and no causal term.
  virtual double fidelity_only(int n_factors) = 0;
  /// Full training run; returns (C, D) evaluated after training.
  virtual std::pair<double, double> fit(int k, int l, double lambda) = 0;
};

class LingaussSelectionBackend : public SelectionBackend {
 public:
  LingaussSelectionBackend(const Classifier& f, Eigen::MatrixXd data_cov,
                           TrainConfig base_cfg, int eval_n_alpha = 2000,
                           int eval_n_beta = 100);
  double fidelity_only(int n_factors) override;
  std::pair<double, double> fit(int k, int l, double lambda) override;

 private:
  const Classifier& f_;
  Eigen::MatrixXd data_cov_;
  TrainConfig base_;
  int eval_n_alpha_, eval_n_beta_;
};

class VaeSelectionBackend : public SelectionBackend {
 public:
  VaeSelectionBackend(const Classifier& f, const Dataset& data,
                      TrainConfig base_cfg, VaeArch arch,
                      int fidelity_steps = 0, int eval_n_alpha = 1000,
                      int eval_n_beta = 25, int eval_batch = 256);
  double fidelity_only(int n_factors) override;
  std::pair<double, double> fit(int k, int l, double lambda) override;

 private:
  Eigen::MatrixXd eval_batch_rows() const;
  const Classifier& f_;
  const Dataset& data_;
  TrainConfig base_;
  VaeArch arch_;
  int fidelity_steps_;
  int eval_n_alpha_, eval_n_beta_, eval_batch_;
};

struct SelectionConfig {
  double plateau_eps_d = 0.02;  // budget scan: relative D improvement floor
  double plateau_eps_c = 0.05;  // staged scan: relative C gain floor
  double c_floor = 0.05;        // nats; scale floor for the C plateau test
  double fidelity_slack = 0.05;     // relative slack against the reference D
  double fidelity_slack_abs = 0.1;  // absolute slack floor
  int l_max = 16;
  double lambda_base = 0.01;
  int lambda_ladder_max = 10;  // lambda = base * 2^j, j = 0..max
};

struct BudgetPoint {
  int l = 0;
  double d_value = 0.0;
};

struct SelectionIterate {
  int k = 0;
  int l = 0;
  double lambda = 0.0;
  double c_value = 0.0;
  double d_value = 0.0;
  bool fidelity_met = true;  // false when the lambda ladder was exhausted
};

/// Complete audit record of one selection run. The decision thresholds are
/// stored alongside the measurements so decide_selection() can reproduce the
/// chosen configuration from the trace alone.
struct SelectionTrace {
  std::vector<BudgetPoint> budget_scan;
  int l_total = 0;
  bool budget_plateau_found = true;
  double d_reference = 0.0;
  std::vector<SelectionIterate> iterates;
  bool plateau_at_first = false;
  SelectionConfig config;
};

struct SelectionResult {
  int k = 0;
  int l = 0;
  double lambda = 0.0;
  SelectionTrace trace;
};

/// Budget scan: grow L with the fidelity-only objective until the relative
/// D improvement drops below plateau_eps_d, and return the last L that still
/// improved. Falls back to l_max (with a trace warning) if no plateau shows.
int select_latent_budget(SelectionBackend& backend, const SelectionConfig& cfg,
                         SelectionTrace* trace_out = nullptr);

/// Staged search: starting from the Step-1 budget, trade one noncausal
/// factor for a causal one per iteration, re-raising lambda along a geometric
/// ladder until fidelity returns to the reference, and stop when C plateaus;
/// the configuration immediately before the plateau wins.
SelectionResult select_params(SelectionBackend& backend,
                              const SelectionConfig& cfg);

/// Pure replay of the plateau decisions on a stored trace.
SelectionResult decide_selection(const SelectionTrace& trace);

}  // namespace gcx

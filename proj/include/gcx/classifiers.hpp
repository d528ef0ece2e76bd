#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "gcx/data.hpp"
#include "gcx/mlp.hpp"
#include "gcx/rng.hpp"
#include "gcx/tape.hpp"

namespace gcx {

/// Black-box view of a classifier: class probabilities on the simplex plus
/// the gradient of each class probability with respect to the input. All
/// downstream explanation code goes through this interface only.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int num_classes() const = 0;
  virtual int input_dim() const = 0;
  /// X: n x input_dim -> n x num_classes, each row on the simplex.
  virtual Eigen::MatrixXd predict_proba_batch(
      const Eigen::Ref<const Eigen::MatrixXd>& x) const = 0;
  /// d p(class|x) / dx for one class: n x input_dim.
  virtual Eigen::MatrixXd predict_grad_batch(
      const Eigen::Ref<const Eigen::MatrixXd>& x, int cls) const = 0;

  Eigen::VectorXd predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict_grad(const Eigen::Ref<const Eigen::VectorXd>& x,
                               int cls) const;

 protected:
  void check_input(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  void check_class(int cls) const;
};

enum class SigmoidKind { kNormalCdf, kLogistic };

/// p(y=1|x) = sigma(a^T x), sigma either the standard normal CDF or a
/// logistic with configurable steepness. Class order: [p(y=0), p(y=1)].
class LinearSigmoidClassifier : public Classifier {
 public:
  LinearSigmoidClassifier(Eigen::VectorXd a, SigmoidKind kind,
                          double steepness = 1.0);
  int num_classes() const override { return 2; }
  int input_dim() const override { return static_cast<int>(a_.size()); }
  Eigen::MatrixXd predict_proba_batch(
      const Eigen::Ref<const Eigen::MatrixXd>& x) const override;
  Eigen::MatrixXd predict_grad_batch(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     int cls) const override;
  const Eigen::VectorXd& normal() const { return a_; }

 private:
  Eigen::VectorXd a_;
  SigmoidKind kind_;
  double steepness_;
};

/// p(y=1|x) = sigma(s a1^T x) * sigma(s a2^T x) with logistic sigma; high
/// probability only inside the quadrant where both scores are positive.
class AndClassifier : public Classifier {
 public:
  AndClassifier(Eigen::VectorXd a1, Eigen::VectorXd a2, double steepness);
  int num_classes() const override { return 2; }
  int input_dim() const override { return static_cast<int>(a1_.size()); }
  Eigen::MatrixXd predict_proba_batch(
      const Eigen::Ref<const Eigen::MatrixXd>& x) const override;
  Eigen::MatrixXd predict_grad_batch(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     int cls) const override;

 private:
  Eigen::VectorXd a1_, a2_;
  double steepness_;
};

/// Dense relu network with a softmax head.
class MlpClassifier : public Classifier {
 public:
  MlpClassifier(Mlp net, int num_classes);
  int num_classes() const override { return num_classes_; }
  int input_dim() const override { return net_.input_dim(); }
  Eigen::MatrixXd predict_proba_batch(
      const Eigen::Ref<const Eigen::MatrixXd>& x) const override;
  Eigen::MatrixXd predict_grad_batch(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     int cls) const override;
  const Mlp& net() const { return net_; }
  Mlp& mutable_net() { return net_; }

 private:
  Mlp net_;
  int num_classes_;
};

struct ClassifierTrainConfig {
  std::vector<int> hidden = {64, 64};
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 0.1;
  double momentum = 0.5;
  std::uint64_t seed = 0;
};

struct ClassifierTrainResult {
  std::unique_ptr<MlpClassifier> classifier;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
};

/// Minibatch SGD with momentum on the softmax cross-entropy. Requires at
/// least two classes present in the training labels.
ClassifierTrainResult train_mlp_classifier(const SplitDataset& data,
                                           const ClassifierTrainConfig& cfg);

double classifier_accuracy(const Classifier& f, const Dataset& data);

/// Tape node wrapping a black-box classifier: forward is predict_proba_batch,
/// backward routes adjoints through predict_grad_batch. The classifier's
/// internals never join the graph.
ad::Var classifier_probs(ad::Tape& tape, const Classifier& f, ad::Var x);

}  // namespace gcx

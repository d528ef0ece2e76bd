#include "gcx/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gcx/prob.hpp"

namespace gcx {

void Classifier::check_input(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != input_dim()) {
    throw std::invalid_argument(
        "classifier: input has " + std::to_string(x.cols()) +
        " features, expected " + std::to_string(input_dim()));
  }
}

void Classifier::check_class(int cls) const {
  if (cls < 0 || cls >= num_classes()) {
    throw std::invalid_argument("classifier: class index " +
                                std::to_string(cls) + " outside [0, " +
                                std::to_string(num_classes()) + ")");
  }
}

Eigen::VectorXd Classifier::predict_proba(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return predict_proba_batch(x.transpose()).row(0);
}

Eigen::VectorXd Classifier::predict_grad(
    const Eigen::Ref<const Eigen::VectorXd>& x, int cls) const {
  return predict_grad_batch(x.transpose(), cls).row(0);
}

// -- LinearSigmoidClassifier --------------------------------------------------

LinearSigmoidClassifier::LinearSigmoidClassifier(Eigen::VectorXd a,
                                                 SigmoidKind kind,
                                                 double steepness)
    : a_(std::move(a)), kind_(kind), steepness_(steepness) {
  if (a_.norm() == 0.0) {
    throw std::invalid_argument("LinearSigmoidClassifier: zero normal vector");
  }
}

Eigen::MatrixXd LinearSigmoidClassifier::predict_proba_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  check_input(x);
  const Eigen::VectorXd u = x * a_;
  Eigen::MatrixXd p(x.rows(), 2);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double p1 = kind_ == SigmoidKind::kNormalCdf
                          ? normal_cdf(u[i])
                          : logistic(steepness_ * u[i]);
    p(i, 0) = 1.0 - p1;
    p(i, 1) = p1;
  }
  return p;
}

Eigen::MatrixXd LinearSigmoidClassifier::predict_grad_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x, int cls) const {
  check_input(x);
  check_class(cls);
  const Eigen::VectorXd u = x * a_;
  Eigen::VectorXd slope(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (kind_ == SigmoidKind::kNormalCdf) {
      slope[i] = normal_pdf(u[i]);
    } else {
      const double s = logistic(steepness_ * u[i]);
      slope[i] = steepness_ * s * (1.0 - s);
    }
  }
  if (cls == 0) slope = -slope;
  return slope * a_.transpose();
}

// -- AndClassifier ------------------------------------------------------------

AndClassifier::AndClassifier(Eigen::VectorXd a1, Eigen::VectorXd a2,
                             double steepness)
    : a1_(std::move(a1)), a2_(std::move(a2)), steepness_(steepness) {
  if (a1_.norm() == 0.0 || a2_.norm() == 0.0) {
    throw std::invalid_argument("AndClassifier: zero normal vector");
  }
  if (a1_.size() != a2_.size()) {
    throw std::invalid_argument("AndClassifier: normals of length " +
                                std::to_string(a1_.size()) + " and " +
                                std::to_string(a2_.size()));
  }
}

Eigen::MatrixXd AndClassifier::predict_proba_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  check_input(x);
  const Eigen::VectorXd u1 = x * a1_;
  const Eigen::VectorXd u2 = x * a2_;
  Eigen::MatrixXd p(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double p1 = logistic(steepness_ * u1[i]) * logistic(steepness_ * u2[i]);
    p(i, 0) = 1.0 - p1;
    p(i, 1) = p1;
  }
  return p;
}

Eigen::MatrixXd AndClassifier::predict_grad_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x, int cls) const {
  check_input(x);
  check_class(cls);
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s1 = logistic(steepness_ * x.row(i).dot(a1_));
    const double s2 = logistic(steepness_ * x.row(i).dot(a2_));
    g.row(i) = steepness_ * (s1 * (1.0 - s1) * s2 * a1_.transpose() +
                             s2 * (1.0 - s2) * s1 * a2_.transpose());
  }
  if (cls == 0) g = -g;
  return g;
}

// -- MlpClassifier ------------------------------------------------------------

MlpClassifier::MlpClassifier(Mlp net, int num_classes)
    : net_(std::move(net)), num_classes_(num_classes) {
  if (net_.output_dim() != num_classes_) {
    throw std::invalid_argument("MlpClassifier: head width " +
                                std::to_string(net_.output_dim()) +
                                " != class count " +
                                std::to_string(num_classes_));
  }
}

Eigen::MatrixXd MlpClassifier::predict_proba_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  check_input(x);
  return ad::softmax_rows_forward(net_.forward_nograd(x));
}

Eigen::MatrixXd MlpClassifier::predict_grad_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x, int cls) const {
  check_input(x);
  check_class(cls);
  ad::Tape tape;
  ad::Var xv = tape.variable(x);
  std::vector<ad::Var> params;
  params.reserve(net_.weights.size() * 2);
  for (std::size_t l = 0; l < net_.weights.size(); ++l) {
    params.push_back(tape.constant(net_.weights[l]));
    params.push_back(tape.constant(net_.biases[l]));
  }
  ad::Var probs = ad::softmax_rows(net_.forward(tape, xv, params));
  Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(num_classes_, 1);
  pick(cls, 0) = 1.0;
  ad::Var loss = ad::sum(ad::matmul(probs, tape.constant(pick)));
  tape.backward(loss);
  return tape.grad(xv);
}

// -- training -----------------------------------------------------------------

namespace {

double accuracy(const Classifier& f, const Eigen::MatrixXd& x,
                const Eigen::VectorXi& labels) {
  const Eigen::MatrixXd p = f.predict_proba_batch(x);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index arg;
    p.row(i).maxCoeff(&arg);
    if (arg == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

}  // namespace

double classifier_accuracy(const Classifier& f, const Dataset& data) {
  return accuracy(f, data.x, data.labels);
}

ClassifierTrainResult train_mlp_classifier(const SplitDataset& data,
                                           const ClassifierTrainConfig& cfg) {
  const int m = data.train.num_classes;
  if (m < 2) throw std::invalid_argument("train_mlp_classifier: < 2 classes");
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(m);
  for (Eigen::Index i = 0; i < data.train.labels.size(); ++i) {
    counts[data.train.labels[i]]++;
  }
  for (int c = 0; c < m; ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument("train_mlp_classifier: class " +
                                  std::to_string(c) + " has no samples");
    }
  }

  SeededRng rng(cfg.seed, 17);
  std::vector<int> dims;
  dims.push_back(static_cast<int>(data.train.dim()));
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(m);
  Mlp net = Mlp::make(dims, rng);

  std::vector<Eigen::MatrixXd> velocity;
  for (auto* p : net.params()) velocity.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));

  const Eigen::Index n = data.train.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  SeededRng shuffle_rng = rng.split(1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the seeded stream keeps runs reproducible.
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const Eigen::Index j =
          static_cast<Eigen::Index>(shuffle_rng.next_u64() % (i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(bs, data.train.dim());
      Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(bs, m);
      for (Eigen::Index i = 0; i < bs; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = data.train.x.row(src);
        onehot(i, data.train.labels[src]) = 1.0;
      }
      ad::Tape tape;
      std::vector<ad::Var> params = net.bind(tape);
      ad::Var probs = ad::softmax_rows(net.forward(tape, tape.constant(xb), params));
      ad::Var loss = ad::scale(
          ad::sum(ad::cmul(tape.constant(onehot),
                           ad::log(ad::clamp_min(probs, 1e-12)))),
          -1.0 / static_cast<double>(bs));
      tape.backward(loss);
      auto raw = net.params();
      for (std::size_t k = 0; k < raw.size(); ++k) {
        velocity[k] = cfg.momentum * velocity[k] + tape.grad(params[k]);
        *raw[k] -= cfg.learning_rate * velocity[k];
      }
    }
  }

  ClassifierTrainResult out;
  out.classifier = std::make_unique<MlpClassifier>(std::move(net), m);
  out.train_accuracy = accuracy(*out.classifier, data.train.x, data.train.labels);
  out.validation_accuracy =
      data.validation.size() > 0
          ? accuracy(*out.classifier, data.validation.x, data.validation.labels)
          : out.train_accuracy;
  return out;
}

// -- black-box bridge ----------------------------------------------------------

ad::Var classifier_probs(ad::Tape& tape, const Classifier& f, ad::Var x) {
  const Eigen::MatrixXd& xv = tape.value(x);
  Eigen::MatrixXd probs = f.predict_proba_batch(xv);
  const Classifier* fp = &f;
  const int xi = x.id;
  const int id = tape.emplace(
      std::move(probs), {xi},
      [fp, xi](ad::Tape& tp, int self) {
        const Eigen::MatrixXd& g = tp.grad_at(self);
        const Eigen::MatrixXd& xin = tp.val(xi);
        Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(xin.rows(), xin.cols());
        for (int m = 0; m < fp->num_classes(); ++m) {
          if ((g.col(m).array() == 0.0).all()) continue;
          gx += fp->predict_grad_batch(xin, m).array().colwise() *
                g.col(m).array();
        }
        tp.accumulate_grad(xi, gx);
      },
      tape.tracked(x.id));
  return ad::Var{&tape, id};
}

}  // namespace gcx

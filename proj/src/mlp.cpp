#include "gcx/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace gcx {

Mlp Mlp::make(const std::vector<int>& dims, SeededRng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need >= 2 dims");
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const bool hidden = l + 2 < dims.size();
    const double sd = std::sqrt((hidden ? 2.0 : 1.0) / fan_in);
    Eigen::MatrixXd w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = sd * rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::MatrixXd::Zero(1, fan_out));
  }
  return net;
}

std::vector<ad::Var> Mlp::bind(ad::Tape& tape) const {
  std::vector<ad::Var> vars;
  vars.reserve(weights.size() * 2);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    vars.push_back(tape.variable(weights[l]));
    vars.push_back(tape.variable(biases[l]));
  }
  return vars;
}

ad::Var Mlp::forward(ad::Tape& tape, ad::Var x,
                     const std::vector<ad::Var>& params) const {
  if (params.size() != weights.size() * 2) {
    throw std::invalid_argument("Mlp::forward: wrong param count");
  }
  ad::Var h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = ad::broadcast_add_row(ad::matmul(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < weights.size()) h = ad::relu(h);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_nograd(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = (h * weights[l]).rowwise() + biases[l].row(0);
    if (l + 1 < weights.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

std::vector<Eigen::MatrixXd*> Mlp::params() {
  std::vector<Eigen::MatrixXd*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

}  // namespace gcx

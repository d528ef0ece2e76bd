#include "gcx/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gcx {

namespace {

std::size_t flat_size(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

// xlogx with the 0 log 0 = 0 convention
double xlx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

JointTable JointTable::zeros(std::vector<int> d) {
  JointTable t;
  t.dims = std::move(d);
  t.p.assign(flat_size(t.dims), 0.0);
  return t;
}

double& JointTable::at(const std::vector<int>& idx) {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    flat = flat * static_cast<std::size_t>(dims[a]) +
           static_cast<std::size_t>(idx[a]);
  }
  return p[flat];
}

double JointTable::at(const std::vector<int>& idx) const {
  return const_cast<JointTable*>(this)->at(idx);
}

JointTable JointTable::marginal(const std::vector<int>& axes) const {
  std::vector<int> out_dims;
  out_dims.reserve(axes.size());
  for (int a : axes) out_dims.push_back(dims[static_cast<std::size_t>(a)]);
  JointTable out = JointTable::zeros(out_dims);

  std::vector<int> idx(dims.size(), 0);
  for (std::size_t flat = 0; flat < p.size(); ++flat) {
    std::size_t oflat = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      oflat = oflat * static_cast<std::size_t>(out_dims[a]) +
              static_cast<std::size_t>(idx[static_cast<std::size_t>(axes[a])]);
    }
    out.p[oflat] += p[flat];
    for (std::size_t a = dims.size(); a-- > 0;) {
      if (++idx[a] < dims[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

double JointTable::entropy() const {
  double h = 0.0;
  for (double v : p) h -= xlx(v);
  return h;
}

double JointTable::total() const {
  return std::accumulate(p.begin(), p.end(), 0.0);
}

double JointTable::conditional_mi(const std::vector<int>& u,
                                  const std::vector<int>& v,
                                  const std::vector<int>& w) const {
  std::vector<int> uvw = u;
  uvw.insert(uvw.end(), v.begin(), v.end());
  uvw.insert(uvw.end(), w.begin(), w.end());
  const JointTable juvw = marginal(uvw);

  std::vector<int> uw = u;
  uw.insert(uw.end(), w.begin(), w.end());
  const JointTable juw = marginal(uw);
  std::vector<int> vw = v;
  vw.insert(vw.end(), w.begin(), w.end());
  const JointTable jvw = marginal(vw);
  const JointTable jw = marginal(w);  // 0-axis table holds the total mass

  const std::size_t nu = u.size(), nv = v.size(), nw = w.size();
  std::vector<int> idx(uvw.size(), 0);
  std::vector<int> iw(nw), iuw(nu + nw), ivw(nv + nw);
  double total = 0.0;
  for (std::size_t flat = 0; flat < juvw.p.size(); ++flat) {
    const double puvw = juvw.p[flat];
    if (puvw > 0.0) {
      for (std::size_t a = 0; a < nu; ++a) iuw[a] = idx[a];
      for (std::size_t a = 0; a < nw; ++a) iuw[nu + a] = idx[nu + nv + a];
      for (std::size_t a = 0; a < nv; ++a) ivw[a] = idx[nu + a];
      for (std::size_t a = 0; a < nw; ++a) ivw[nv + a] = idx[nu + nv + a];
      for (std::size_t a = 0; a < nw; ++a) iw[a] = idx[nu + nv + a];
      const double puw = juw.at(iuw);
      const double pvw = jvw.at(ivw);
      const double pw = nw == 0 ? jw.total() : jw.at(iw);
      total += puvw * std::log(puvw * pw / (puw * pvw));
    }
    for (std::size_t a = idx.size(); a-- > 0;) {
      if (++idx[a] < juvw.dims[a]) break;
      idx[a] = 0;
    }
  }
  return total;
}

// -- DiscreteSCM -----------------------------------------------------------------

int DiscreteSCM::n_alpha_configs() const {
  int n = 1;
  for (const auto& m : alpha_marginals) n *= static_cast<int>(m.size());
  return n;
}

int DiscreteSCM::n_beta_configs() const {
  int n = 1;
  for (const auto& m : beta_marginals) n *= static_cast<int>(m.size());
  return n;
}

int DiscreteSCM::latent_index(int alpha_cfg, int beta_cfg) const {
  return alpha_cfg * n_beta_configs() + beta_cfg;
}

double DiscreteSCM::alpha_prob(int alpha_cfg) const {
  double p = 1.0;
  for (std::size_t f = alpha_marginals.size(); f-- > 0;) {
    const int size = static_cast<int>(alpha_marginals[f].size());
    p *= alpha_marginals[f][alpha_cfg % size];
    alpha_cfg /= size;
  }
  return p;
}

double DiscreteSCM::beta_prob(int beta_cfg) const {
  double p = 1.0;
  for (std::size_t f = beta_marginals.size(); f-- > 0;) {
    const int size = static_cast<int>(beta_marginals[f].size());
    p *= beta_marginals[f][beta_cfg % size];
    beta_cfg /= size;
  }
  return p;
}

void DiscreteSCM::validate() const {
  auto check_pmf = [](const Eigen::VectorXd& v, const std::string& what) {
    if (v.minCoeff() < 0.0 || std::abs(v.sum() - 1.0) > 1e-12) {
      throw std::invalid_argument(what + " is not a normalized pmf");
    }
  };
  for (std::size_t f = 0; f < alpha_marginals.size(); ++f) {
    check_pmf(alpha_marginals[f], "alpha marginal " + std::to_string(f));
  }
  for (std::size_t f = 0; f < beta_marginals.size(); ++f) {
    check_pmf(beta_marginals[f], "beta marginal " + std::to_string(f));
  }
  const int n_latent = n_alpha_configs() * n_beta_configs();
  if (x_given_latents.rows() != n_latent) {
    throw std::invalid_argument("x table has " +
                                std::to_string(x_given_latents.rows()) +
                                " rows, expected " + std::to_string(n_latent));
  }
  if (y_given_x.rows() != x_given_latents.cols()) {
    throw std::invalid_argument("y table rows do not match X alphabet");
  }
  for (Eigen::Index r = 0; r < x_given_latents.rows(); ++r) {
    check_pmf(x_given_latents.row(r), "p(x | latents) row " + std::to_string(r));
  }
  for (Eigen::Index r = 0; r < y_given_x.rows(); ++r) {
    check_pmf(y_given_x.row(r), "p(y | x) row " + std::to_string(r));
  }
  const double states = static_cast<double>(n_latent) * n_x() * n_y();
  if (states > 1e6) {
    throw std::invalid_argument("state space too large for enumeration");
  }
}

JointTable DiscreteSCM::joint_latents_y() const {
  validate();
  std::vector<int> dims;
  for (const auto& m : alpha_marginals) dims.push_back(static_cast<int>(m.size()));
  for (const auto& m : beta_marginals) dims.push_back(static_cast<int>(m.size()));
  dims.push_back(n_y());
  JointTable out = JointTable::zeros(dims);

  const int na = n_alpha_configs(), nb = n_beta_configs();
  std::vector<int> idx(dims.size());
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      const double pl = alpha_prob(a) * beta_prob(b);
      const Eigen::RowVectorXd py =
          x_given_latents.row(latent_index(a, b)) * y_given_x;
      // unpack mixed-radix config into the index vector
      int rest = a;
      for (std::size_t f = alpha_marginals.size(); f-- > 0;) {
        idx[f] = rest % static_cast<int>(alpha_marginals[f].size());
        rest /= static_cast<int>(alpha_marginals[f].size());
      }
      rest = b;
      for (std::size_t f = beta_marginals.size(); f-- > 0;) {
        idx[alpha_marginals.size() + f] =
            rest % static_cast<int>(beta_marginals[f].size());
        rest /= static_cast<int>(beta_marginals[f].size());
      }
      for (int y = 0; y < n_y(); ++y) {
        idx.back() = y;
        out.at(idx) += pl * py[y];
      }
    }
  }
  return out;
}

DiscreteSCM DiscreteSCM::random(const std::vector<int>& alpha_sizes,
                                const std::vector<int>& beta_sizes, int x_size,
                                int y_size, SeededRng& rng) {
  auto random_pmf = [&rng](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform01() + 0.05;
    return (v / v.sum()).eval();
  };
  DiscreteSCM scm;
  for (int s : alpha_sizes) scm.alpha_marginals.push_back(random_pmf(s));
  for (int s : beta_sizes) scm.beta_marginals.push_back(random_pmf(s));
  const int n_latent = scm.n_alpha_configs() * scm.n_beta_configs();
  scm.x_given_latents.resize(n_latent, x_size);
  for (int r = 0; r < n_latent; ++r) {
    scm.x_given_latents.row(r) = random_pmf(x_size).transpose();
  }
  scm.y_given_x.resize(x_size, y_size);
  for (int r = 0; r < x_size; ++r) {
    scm.y_given_x.row(r) = random_pmf(y_size).transpose();
  }
  return scm;
}

// -- interventional information flow ----------------------------------------------

double exact_information_flow(const DiscreteSCM& scm, bool imposing_beta) {
  scm.validate();
  const int na = scm.n_alpha_configs(), nb = scm.n_beta_configs();
  const int ny = scm.n_y();

  if (!imposing_beta) {
    // p(y | do(a)): clamp the alpha block, propagate beta and X mechanisms.
    Eigen::MatrixXd py_do_a = Eigen::MatrixXd::Zero(na, ny);
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) {
        py_do_a.row(a) += scm.beta_prob(b) *
                          scm.x_given_latents.row(scm.latent_index(a, b)) *
                          scm.y_given_x;
      }
    }
    Eigen::RowVectorXd mix = Eigen::RowVectorXd::Zero(ny);
    for (int a = 0; a < na; ++a) mix += scm.alpha_prob(a) * py_do_a.row(a);
    double flow = 0.0;
    for (int a = 0; a < na; ++a) {
      const double pa = scm.alpha_prob(a);
      for (int y = 0; y < ny; ++y) {
        const double pya = py_do_a(a, y);
        if (pya > 0.0) flow += pa * pya * std::log(pya / mix[y]);
      }
    }
    return flow;
  }

  // Imposing beta: clamp beta to each value (weighted by its marginal,
  // unchanged by the surgery since beta has no parents), then measure the
  // flow from alpha to Y inside each clamped model.
  double flow = 0.0;
  for (int b = 0; b < nb; ++b) {
    Eigen::MatrixXd py_do_ab(na, ny);
    for (int a = 0; a < na; ++a) {
      py_do_ab.row(a) =
          scm.x_given_latents.row(scm.latent_index(a, b)) * scm.y_given_x;
    }
    Eigen::RowVectorXd mix = Eigen::RowVectorXd::Zero(ny);
    for (int a = 0; a < na; ++a) mix += scm.alpha_prob(a) * py_do_ab.row(a);
    double inner = 0.0;
    for (int a = 0; a < na; ++a) {
      const double pa = scm.alpha_prob(a);
      for (int y = 0; y < ny; ++y) {
        const double pya = py_do_ab(a, y);
        if (pya > 0.0) inner += pa * pya * std::log(pya / mix[y]);
      }
    }
    flow += scm.beta_prob(b) * inner;
  }
  return flow;
}

double exact_mi(const JointTable& joint, const std::vector<int>& u,
                const std::vector<int>& v) {
  if (std::abs(joint.total() - 1.0) > 1e-9) {
    throw std::invalid_argument("exact_mi: joint not normalized");
  }
  return joint.mi(u, v);
}

double exact_conditional_mi(const JointTable& joint, const std::vector<int>& u,
                            const std::vector<int>& v,
                            const std::vector<int>& w) {
  if (std::abs(joint.total() - 1.0) > 1e-9) {
    throw std::invalid_argument("exact_conditional_mi: joint not normalized");
  }
  return joint.conditional_mi(u, v, w);
}

// -- influence family & identities -------------------------------------------------

namespace {

std::vector<int> range_vec(int begin, int end) {
  std::vector<int> v;
  for (int i = begin; i < end; ++i) v.push_back(i);
  return v;
}

}  // namespace

InfluenceFamily exact_influence_family(const DiscreteSCM& scm) {
  const JointTable joint = scm.joint_latents_y();
  const int k = scm.k(), l = scm.l();
  const int y_axis = k + l;
  const std::vector<int> alpha_axes = range_vec(0, k);
  const std::vector<int> beta_axes = range_vec(k, k + l);

  InfluenceFamily fam{};
  fam.joint_unconditional = joint.mi(alpha_axes, {y_axis});
  fam.joint_conditional = joint.conditional_mi(alpha_axes, {y_axis}, beta_axes);
  double iu = 0.0, ic = 0.0;
  for (int i = 0; i < k; ++i) {
    std::vector<int> rest = beta_axes;
    for (int j = 0; j < k; ++j) {
      if (j != i) rest.push_back(j);
    }
    iu += joint.mi({i}, {y_axis});
    ic += joint.conditional_mi({i}, {y_axis}, rest);
  }
  fam.independent_unconditional = iu / k;
  fam.independent_conditional = ic / k;
  return fam;
}

VariantIdentityReport variant_identity_check(const DiscreteSCM& scm) {
  const JointTable joint = scm.joint_latents_y();
  const InfluenceFamily fam = exact_influence_family(scm);
  const int k = scm.k(), l = scm.l();
  const int y_axis = k + l;
  const std::vector<int> alpha_axes = range_vec(0, k);
  const std::vector<int> beta_axes = range_vec(k, k + l);

  double adj_a = 0.0, adj_b = 0.0, adj_d = 0.0;
  for (int i = 0; i < k; ++i) {
    std::vector<int> not_i;
    for (int j = 0; j < k; ++j) {
      if (j != i) not_i.push_back(j);
    }
    adj_a += joint.conditional_mi(not_i, {y_axis}, {i});
    adj_b += joint.conditional_mi(not_i, {y_axis}, beta_axes);
    std::vector<int> not_i_and_beta = not_i;
    not_i_and_beta.insert(not_i_and_beta.end(), beta_axes.begin(),
                          beta_axes.end());
    adj_d += joint.conditional_mi({i}, not_i_and_beta, {y_axis});
  }
  adj_a /= k;
  adj_b /= k;
  adj_d /= k;
  const double adj_c = joint.conditional_mi(alpha_axes, beta_axes, {y_axis});

  VariantIdentityReport rep{};
  rep.residual_a =
      fam.joint_unconditional - fam.independent_unconditional - adj_a;
  rep.residual_b = fam.joint_conditional - fam.independent_conditional - adj_b;
  rep.residual_c = fam.joint_conditional - fam.joint_unconditional - adj_c;
  rep.residual_d =
      fam.independent_conditional - fam.independent_unconditional - adj_d;
  return rep;
}

double VariantIdentityReport::max_abs() const {
  return std::max({std::abs(residual_a), std::abs(residual_b),
                   std::abs(residual_c), std::abs(residual_d)});
}

}  // namespace gcx

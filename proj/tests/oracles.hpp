#pragma once

// Brute-force references built from first principles: the marginal
// covariance of every stacked response with all latent effects integrated
// out, and Gaussian conditioning on it. Nothing here goes through the
// library's stacked system or posterior code.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "lndm/fit.hpp"
#include "lndm/spatial.hpp"
#include "support.hpp"

namespace lndm::test {

struct JointGaussian {
  Eigen::VectorXd mean;  // coordinate-major over rows
  Eigen::MatrixXd cov;
};

// y stacked as (d, n) -> d * N + n over the given rows.
inline JointGaussian marginal_joint(const Eigen::MatrixXd& design, const std::optional<Eigen::MatrixXd>& coords,
                                    const ModelSpec& spec, const ModelHyper& h, int k) {
  const Eigen::Index n = design.rows(), p = design.cols();
  const bool shared_beta = static_cast<int>(spec.structure) % 2 == 1;
  const Eigen::Index nb = shared_beta ? p : p * k;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n * k, nb);
  for (int d = 0; d < k; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index m = 0; m < p; ++m) x(d * n + i, shared_beta ? m : m * k + d) = design(i, m);
    }
  }
  Eigen::VectorXd prior_mean = Eigen::VectorXd::Constant(nb, spec.priors.beta_mean);
  Eigen::VectorXd prior_var = Eigen::VectorXd::Constant(nb, spec.priors.beta_variance);
  for (std::size_t j = 0; j < spec.priors.beta_means.size(); ++j) prior_mean[static_cast<Eigen::Index>(j)] = spec.priors.beta_means[j];
  for (std::size_t j = 0; j < spec.priors.beta_variances.size(); ++j) prior_var[static_cast<Eigen::Index>(j)] = spec.priors.beta_variances[j];

  JointGaussian g;
  g.mean = x * prior_mean;
  g.cov = x * prior_var.asDiagonal() * x.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) g.cov(a * n + i, b * n + i) += (a == b ? h.sigma2[a] : 0.0) + h.gamma;
    }
  }
  if (h.spatial) {
    // Matérn covariance written out from its definition
    const double c = matern_range_constant(h.spatial->nu) / h.spatial->range;
    const double var = h.spatial->sigma_omega * h.spatial->sigma_omega;
    Eigen::MatrixXd cw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double r = c * (coords->row(i) - coords->row(j)).norm();
        cw(i, j) = r < 1e-12 ? var : var * r * std::cyl_bessel_k(1.0, r);
      }
    }
    const int kind = (static_cast<int>(spec.structure) - 1) / 2;  // 1 shared, 2 proportional, 3 replicated
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        double scale = 0.0;
        if (kind == 1) scale = 1.0;
        if (kind == 2) scale = h.alpha[a] * h.alpha[b];
        if (kind == 3) scale = a == b ? 1.0 : 0.0;
        g.cov.block(a * n, b * n, n, n) += scale * cw;
      }
    }
  }
  return g;
}

struct LooOracle {
  Eigen::VectorXd density;  // per coordinate
  double joint_log = 0.0;
};

// Leave-one-composition-out predictive of row `held` of `data`, mixed over
// the integration points of `refit` (a fit on the remaining rows).
inline LooOracle loo_oracle(const FitResult& refit, const ModelData& data, Eigen::Index held) {
  const Eigen::Index n = data.rows();
  const int k = data.coordinates();
  // reorder rows: training rows first, held-out last
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != held) order.push_back(i);
  }
  order.push_back(held);
  Eigen::MatrixXd design(n, data.design.cols());
  std::optional<Eigen::MatrixXd> coords;
  if (data.coords) coords = Eigen::MatrixXd(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    design.row(r) = data.design.row(order[static_cast<std::size_t>(r)]);
    if (coords) coords->row(r) = data.coords->row(order[static_cast<std::size_t>(r)]);
  }
  std::vector<Eigen::Index> train_idx, new_idx;
  for (int d = 0; d < k; ++d) {
    for (Eigen::Index r = 0; r < n - 1; ++r) train_idx.push_back(d * n + r);
    new_idx.push_back(d * n + n - 1);
  }
  Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_idx.size()));
  for (int d = 0; d < k; ++d) {
    for (Eigen::Index r = 0; r < n - 1; ++r) y_train[d * (n - 1) + r] = data.z(order[static_cast<std::size_t>(r)], d);
  }
  const Eigen::VectorXd z = data.z.row(held).transpose();

  LooOracle out;
  out.density = Eigen::VectorXd::Zero(k);
  std::vector<double> joint_terms;
  for (const auto& pt : refit.points) {
    const JointGaussian g = marginal_joint(design, coords, refit.spec, pt.hyper, k);
    const auto nt = static_cast<Eigen::Index>(train_idx.size());
    Eigen::MatrixXd ctt(nt, nt), cnt(k, nt), cnn(k, k);
    Eigen::VectorXd mt(nt), mn(k);
    for (Eigen::Index a = 0; a < nt; ++a) {
      mt[a] = g.mean[train_idx[a]];
      for (Eigen::Index b = 0; b < nt; ++b) ctt(a, b) = g.cov(train_idx[a], train_idx[b]);
    }
    for (int a = 0; a < k; ++a) {
      mn[a] = g.mean[new_idx[a]];
      for (Eigen::Index b = 0; b < nt; ++b) cnt(a, b) = g.cov(new_idx[a], train_idx[b]);
      for (int b = 0; b < k; ++b) cnn(a, b) = g.cov(new_idx[a], new_idx[b]);
    }
    const Eigen::MatrixXd gain = cnt * ctt.inverse();
    const Eigen::VectorXd mean = mn + gain * (y_train - mt);
    const Eigen::MatrixXd cov = cnn - gain * cnt.transpose();
    for (int d = 0; d < k; ++d) out.density[d] += pt.weight * std::exp(normal_logpdf(z[d], mean[d], cov(d, d)));
    joint_terms.push_back(std::log(pt.weight) + dense_mvn_logpdf(z, mean, cov));
  }
  double top = -INFINITY;
  for (double t : joint_terms) top = std::max(top, t);
  double s = 0.0;
  for (double t : joint_terms) s += std::exp(t - top);
  out.joint_log = top + std::log(s);
  return out;
}

// Refit on all rows but `held` with the configuration exact CPO uses.
inline FitResult refit_without(const FitResult& full, Eigen::Index held) {
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < full.data.rows(); ++i) {
    if (i != held) keep.push_back(static_cast<int>(i));
  }
  FitConfig cfg = full.config;
  if (full.space->free_dim() > 0) cfg.start = full.grid.mode;
  cfg.hyper_samples = 1;
  return fit(full.data.subset(keep), full.spec, cfg);
}

}  // namespace lndm::test

#pragma once

#include <Eigen/Dense>

namespace lndm {

/// Univariate Gaussian mixture sum_t w_t N(mu_t, var_t).
class GaussianMixture {
 public:
  GaussianMixture(Eigen::VectorXd weights, Eigen::VectorXd means, Eigen::VectorXd variances);

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& variances() const { return variances_; }

  double mean() const;
  double variance() const;
  double sd() const;
  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  /// Inverse CDF by bisection, p in (0, 1).
  double quantile(double p) const;

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd means_;
  Eigen::VectorXd variances_;
};

/// log(sum exp(v)) without overflow.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace lndm

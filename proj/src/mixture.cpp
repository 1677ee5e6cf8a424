#include "lndm/mixture.hpp"

#include <cmath>

#include "lndm/error.hpp"

namespace lndm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) return -INFINITY;
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

GaussianMixture::GaussianMixture(Eigen::VectorXd weights, Eigen::VectorXd means, Eigen::VectorXd variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.size() == 0 || weights_.size() != means_.size() || means_.size() != variances_.size()) {
    throw DimensionError("GaussianMixture: component vectors must be non-empty and equally long");
  }
  if ((weights_.array() < 0.0).any() || (variances_.array() < 0.0).any()) {
    throw DomainError("GaussianMixture: weights and variances must be nonnegative");
  }
  const double total = weights_.sum();
  if (!(total > 0.0)) throw DomainError("GaussianMixture: weights sum to zero");
  weights_ /= total;
}

double GaussianMixture::mean() const { return weights_.dot(means_); }

double GaussianMixture::variance() const {
  const double m = mean();
  return weights_.dot((variances_.array() + (means_.array() - m).square()).matrix());
}

double GaussianMixture::sd() const { return std::sqrt(variance()); }

double GaussianMixture::log_pdf(double x) const {
  Eigen::VectorXd terms(weights_.size());
  for (Eigen::Index t = 0; t < weights_.size(); ++t) {
    const double v = variances_[t];
    const double r = x - means_[t];
    terms[t] = weights_[t] > 0.0 && v > 0.0 ? std::log(weights_[t]) - 0.5 * (kLog2Pi + std::log(v) + r * r / v)
                                            : -INFINITY;
  }
  return log_sum_exp(terms);
}

double GaussianMixture::pdf(double x) const { return std::exp(log_pdf(x)); }

double GaussianMixture::cdf(double x) const {
  double c = 0.0;
  for (Eigen::Index t = 0; t < weights_.size(); ++t) {
    const double s = std::sqrt(variances_[t]);
    const double p = s > 0.0 ? 0.5 * std::erfc(-(x - means_[t]) / (s * M_SQRT2)) : (x >= means_[t] ? 1.0 : 0.0);
    c += weights_[t] * p;
  }
  return c;
}

double GaussianMixture::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: probability must be in (0, 1)");
  double lo = INFINITY;
  double hi = -INFINITY;
  for (Eigen::Index t = 0; t < weights_.size(); ++t) {
    const double s = std::sqrt(variances_[t]);
    lo = std::min(lo, means_[t] - 40.0 * s - 1e-12);
    hi = std::max(hi, means_[t] + 40.0 * s + 1e-12);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lndm

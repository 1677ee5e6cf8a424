#include "lndm/distributions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lndm/error.hpp"
#include "lndm/special.hpp"

namespace lndm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

DirichletParams::DirichletParams(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw DimensionError("Dirichlet needs at least 2 shape parameters");
  }
  if (!(alpha_.array() > 0.0).all() || !alpha_.allFinite()) {
    throw DomainError("Dirichlet shape parameters must be positive and finite");
  }
  alpha0_ = alpha_.sum();
}

LndParams::LndParams(Eigen::VectorXd mu, Eigen::VectorXd sigma2, double gamma)
    : mu_(std::move(mu)), sigma2_(std::move(sigma2)), gamma_(gamma) {
  if (mu_.size() != sigma2_.size() || mu_.size() < 1) {
    throw DimensionError("LND parameters: mu and sigma2 must have the same positive length");
  }
  if (!(sigma2_.array() > 0.0).all()) {
    throw DomainError("LND parameters: sigma2 must be positive");
  }
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) {
    throw DomainError("LND parameters: gamma must be nonnegative");
  }
}

Eigen::MatrixXd LndParams::covariance() const { return dirichlet_covariance(sigma2_, gamma_); }

double dirichlet_logpdf(const Composition& y, const DirichletParams& p) {
  if (y.parts() != p.parts()) {
    throw DimensionError("dirichlet_logpdf: composition has " + std::to_string(y.parts()) +
                         " parts, parameters have " + std::to_string(p.parts()));
  }
  double log_beta = -std::lgamma(p.alpha0());
  double kernel = 0.0;
  for (Eigen::Index d = 0; d < p.parts(); ++d) {
    log_beta += std::lgamma(p.alpha()[d]);
    kernel += (p.alpha()[d] - 1.0) * std::log(y[d]);
  }
  return kernel - log_beta;
}

DirichletMoments dirichlet_moments(const DirichletParams& p) {
  const double a0 = p.alpha0();
  const double denom = a0 * a0 * (a0 + 1.0);
  DirichletMoments m;
  m.mean = p.alpha() / a0;
  m.covariance = -(p.alpha() * p.alpha().transpose()) / denom;
  for (Eigen::Index d = 0; d < p.parts(); ++d) {
    m.covariance(d, d) = p.alpha()[d] * (a0 - p.alpha()[d]) / denom;
  }
  m.variance = m.covariance.diagonal();
  return m;
}

MatchedLogisticNormal match_ln_to_dirichlet(const DirichletParams& p, int reference) {
  const Eigen::Index parts = p.parts();
  if (reference == -1) reference = static_cast<int>(parts);
  if (reference < 1 || reference > parts) {
    throw IndexError("reference category out of range");
  }
  const double a_ref = p.alpha()[reference - 1];
  const double psi_ref = special::digamma(a_ref);
  const double tri_ref = special::trigamma(a_ref);
  MatchedLogisticNormal out;
  out.mu.resize(parts - 1);
  out.sigma2.resize(parts - 1);
  Eigen::Index j = 0;
  for (Eigen::Index d = 0; d < parts; ++d) {
    if (d == reference - 1) continue;
    out.mu[j] = special::digamma(p.alpha()[d]) - psi_ref;
    out.sigma2[j] = special::trigamma(p.alpha()[d]);
    ++j;
  }
  out.gamma = tri_ref;
  out.sigma = dirichlet_covariance(out.sigma2, out.gamma);
  return out;
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  if (x.size() != mu.size() || sigma.rows() != x.size() || sigma.cols() != x.size()) {
    throw DimensionError("mvn_logpdf: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw ConditioningError("mvn_logpdf: covariance is not positive definite");
  }
  const Eigen::VectorXd w = llt.matrixL().solve(x - mu);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + logdet + w.squaredNorm());
}

double lnd_logpdf(const AlrCoords& z, const LndParams& p, DensityScale scale) {
  if (z.values().size() != p.mu().size()) {
    throw DimensionError("lnd_logpdf: coordinates and parameters differ in dimension");
  }
  double lp = dirichlet_cov_logpdf(z.values(), p.mu(), p.sigma2(), p.gamma());
  if (scale == DensityScale::Simplex) {
    const Composition y = alr_inv(z);
    lp -= y.values().array().log().sum();
  }
  return lp;
}

Eigen::MatrixXd dirichlet_covariance(const Eigen::VectorXd& sigma2, double gamma) {
  if (!(gamma >= 0.0)) {
    throw DomainError("dirichlet_covariance: gamma must be nonnegative");
  }
  if (!(sigma2.array() > 0.0).all()) {
    throw DomainError("dirichlet_covariance: sigma2 must be positive");
  }
  const Eigen::Index k = sigma2.size();
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(k, k, gamma);
  s.diagonal() += sigma2;
  return s;
}

double dirichlet_cov_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mu,
                            const Eigen::VectorXd& sigma2, double gamma) {
  const Eigen::Index k = x.size();
  const Eigen::ArrayXd r = (x - mu).array();
  const Eigen::ArrayXd inv = sigma2.array().inverse();
  const double s = (inv * r).sum();
  const double t = 1.0 + gamma * inv.sum();
  const double quad = (r * r * inv).sum() - gamma * s * s / t;
  const double logdet = sigma2.array().log().sum() + std::log(t);
  return -0.5 * (static_cast<double>(k) * kLog2Pi + logdet + quad);
}

Eigen::VectorXd sample_dirichlet(const DirichletParams& p, std::mt19937_64& rng) {
  Eigen::VectorXd g(p.parts());
  for (Eigen::Index d = 0; d < p.parts(); ++d) {
    std::gamma_distribution<double> gamma(p.alpha()[d], 1.0);
    g[d] = gamma(rng);
  }
  return g / g.sum();
}

}  // namespace lndm

#include "lndm/gaussian_posterior.hpp"

#include <cmath>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string describe(const ModelHyper& h) {
  std::ostringstream s;
  s << "sigma2=(" << h.sigma2.transpose() << "), gamma=" << h.gamma;
  if (h.spatial) s << ", sigma_omega=" << h.spatial->sigma_omega << ", range=" << h.spatial->range;
  return s.str();
}

}  // namespace

Eigen::SparseMatrix<double> posterior_precision(const StackedSystem& sys) {
  Eigen::SparseMatrix<double> at = sys.A.transpose();
  Eigen::SparseMatrix<double> q = at * sys.obs_precision.asDiagonal() * sys.A;
  q += sys.prior_precision;
  q.makeCompressed();
  return q;
}

GaussianPosterior::GaussianPosterior(const StackedSystem& sys) {
  const Eigen::SparseMatrix<double> q = posterior_precision(sys);
  try {
    factor_ = std::make_shared<SpdFactor>(q);
  } catch (const ConditioningError& e) {
    throw ConditioningError(std::string(e.what()) + " at " + describe(sys.hyper));
  }
  const Eigen::VectorXd rhs = sys.prior_precision * sys.prior_mean + sys.A.transpose() * sys.obs_precision.cwiseProduct(sys.y);
  mean_ = factor_->solve(rhs);

  const Eigen::VectorXd res = sys.y - sys.A * mean_;
  const Eigen::VectorXd dm = mean_ - sys.prior_mean;
  const double n = static_cast<double>(sys.y.size());
  log_evidence_ = -0.5 * n * kLog2Pi + 0.5 * sys.obs_precision.array().log().sum() +
                  0.5 * sys.log_det_prior_precision - 0.5 * factor_->log_det() -
                  0.5 * (res.dot(sys.obs_precision.cwiseProduct(res)) + dm.dot(sys.prior_precision * dm));

  if (sys.constraint.size() > 0) {
    constraint_ = sys.constraint;
    constraint_dir_ = factor_->solve(constraint_);
    constraint_var_ = constraint_.dot(constraint_dir_);
    const double cm = constraint_.dot(mean_);
    // p(y | c'x = 0) = p(y) p(c'x = 0 | y) / p(c'x = 0)
    const double prior_cm = constraint_.dot(sys.prior_mean);
    log_evidence_ += -0.5 * (kLog2Pi + std::log(constraint_var_) + cm * cm / constraint_var_) +
                     0.5 * (kLog2Pi + std::log(sys.constraint_prior_variance) +
                            prior_cm * prior_cm / sys.constraint_prior_variance);
    mean_ -= constraint_dir_ * (cm / constraint_var_);
  }
  if (!std::isfinite(log_evidence_)) {
    throw ConditioningError("non-finite log evidence at " + describe(sys.hyper));
  }
}

Eigen::VectorXd GaussianPosterior::marginal_variances() const {
  Eigen::VectorXd v = factor_->inverse_diagonal();
  if (constrained()) v -= constraint_dir_.cwiseAbs2() / constraint_var_;
  return v.cwiseMax(0.0);
}

Eigen::MatrixXd GaussianPosterior::combination_covariance(const Eigen::MatrixXd& m) const {
  const Eigen::MatrixXd h = factor_->half_solve(m.transpose());
  Eigen::MatrixXd cov = h.transpose() * h;
  if (constrained()) {
    const Eigen::VectorXd mc = m * constraint_dir_;
    cov -= mc * mc.transpose() / constraint_var_;
  }
  return cov;
}

Eigen::MatrixXd GaussianPosterior::sample_from_normals(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd x = factor_->colour(z);
  if (constrained()) {
    const Eigen::RowVectorXd cx = constraint_.transpose() * x;
    x -= constraint_dir_ * (cx / constraint_var_);
  }
  x.colwise() += mean_;
  return x;
}

Eigen::MatrixXd GaussianPosterior::sample(Eigen::Index n, std::mt19937_64& rng) const {
  if (n <= 0) throw DomainError("sample: number of draws must be positive");
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::MatrixXd z(size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < size(); ++i) z(i, j) = norm(rng);
  }
  return sample_from_normals(z);
}

GaussianPosterior conditional_posterior(const StackedSystem& sys) { return GaussianPosterior(sys); }

double log_marginal_likelihood(const StackedSystem& sys) { return GaussianPosterior(sys).log_evidence(); }

}  // namespace lndm

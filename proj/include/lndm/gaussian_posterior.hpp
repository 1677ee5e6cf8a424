#pragma once

#include <Eigen/Dense>

#include <memory>
#include <random>

#include "lndm/spd_factor.hpp"
#include "lndm/stacked_system.hpp"

namespace lndm {

/// Exact conditional posterior of the latent vector given one hyperparameter
/// value: N(mean, Q^-1) with Q = A'RA + B, optionally conditioned on c'x = 0.
class GaussianPosterior {
 public:
  GaussianPosterior(const StackedSystem& sys);

  const Eigen::VectorXd& mean() const { return mean_; }
  const SpdFactor& factor() const { return *factor_; }
  Eigen::Index size() const { return mean_.size(); }
  bool constrained() const { return constraint_dir_.size() > 0; }
  /// log p(y | theta), including the constraint correction when present.
  double log_evidence() const { return log_evidence_; }

  /// Posterior marginal variances (diagonal of the possibly constrained covariance).
  Eigen::VectorXd marginal_variances() const;
  /// Posterior covariance of the linear combinations M x (rows of M), dense.
  Eigen::MatrixXd combination_covariance(const Eigen::MatrixXd& m) const;
  /// Joint draws, one per column.
  Eigen::MatrixXd sample(Eigen::Index n, std::mt19937_64& rng) const;
  /// Draws from standard-normal columns z (size x n); deterministic helper of sample().
  Eigen::MatrixXd sample_from_normals(const Eigen::MatrixXd& z) const;

 private:
  std::shared_ptr<SpdFactor> factor_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd constraint_;
  Eigen::VectorXd constraint_dir_;  // Q^-1 c
  double constraint_var_ = 0.0;     // c' Q^-1 c
  double log_evidence_ = 0.0;
};

GaussianPosterior conditional_posterior(const StackedSystem& sys);
double log_marginal_likelihood(const StackedSystem& sys);

/// Posterior precision A'RA + B.
Eigen::SparseMatrix<double> posterior_precision(const StackedSystem& sys);

}  // namespace lndm

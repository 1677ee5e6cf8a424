#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lndm {

/// Matérn field hyperparameters. `range` is the distance at which the
/// correlation has dropped to 0.1.
struct SpatialHyper {
  double sigma_omega = 1.0;
  double range = 1.0;
  double nu = 1.0;

  void validate() const;
};

/// kappa * range for which the Matérn(nu) correlation equals 0.1.
double matern_range_constant(double nu);

/// Matérn correlation at distance r; 1 at r = 0.
double matern_correlation(double r, double range, double nu);

/// N x N covariance sigma_omega^2 * rho(|s_i - s_j|) for an N x 2 coordinate matrix.
Eigen::MatrixXd matern_cov(const Eigen::MatrixXd& coords, const SpatialHyper& h);

/// Cross covariance between rows of `a` (n_a x 2) and rows of `b` (n_b x 2).
Eigen::MatrixXd matern_cross_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SpatialHyper& h);

/// Move exact duplicate locations apart by `jitter` so the covariance is
/// nonsingular. Returns the number of rows moved.
int jitter_duplicate_coords(Eigen::MatrixXd& coords, double jitter = 1e-8);

/// Factorized Matérn prior on one field over N locations.
///
/// `precision` is the inverse covariance; `log_det_cov` the log determinant of
/// the (possibly jittered) covariance. `jittered` is set when 1e-8 sigma^2 had
/// to be added to the diagonal for the factorization to succeed.
class MaternField {
 public:
  MaternField(const Eigen::MatrixXd& coords, const SpatialHyper& h);

  const SpatialHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }
  double log_det_cov() const { return log_det_cov_; }
  bool jittered() const { return jittered_; }
  const Eigen::MatrixXd& coords() const { return coords_; }

  /// Kriging of the field at new locations: weights W (n_new x N) with
  /// E[w_new | w] = W w and conditional variances for each new location.
  struct Kriging {
    Eigen::MatrixXd weights;
    Eigen::VectorXd variance;
  };
  Kriging krige(const Eigen::MatrixXd& new_coords) const;

 private:
  SpatialHyper hyper_;
  Eigen::MatrixXd coords_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd precision_;
  double log_det_cov_ = 0.0;
  bool jittered_ = false;
};

enum class SpatialKind { None, Shared, Proportional, Replicated };

/// Prior precision contribution for the spatial latent blocks of a structure.
/// Shared and proportional structures carry one N-block, replicated carries
/// `coordinates` independent N-blocks sharing hyperparameters; the result is
/// block diagonal.
struct SpatialPrecision {
  Eigen::MatrixXd precision;
  double log_det_precision = 0.0;
  int blocks = 0;
  bool jittered = false;
};

SpatialPrecision spatial_prior_precision(SpatialKind kind, int coordinates, const Eigen::MatrixXd& coords,
                                         const SpatialHyper& h);

}  // namespace lndm

#pragma once

#include <Eigen/Dense>

#include <random>

#include "lndm/coda.hpp"

namespace lndm {

/// Dirichlet shape parameters; alpha0() is the precision (sum of shapes).
class DirichletParams {
 public:
  explicit DirichletParams(Eigen::VectorXd alpha);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  double alpha0() const { return alpha0_; }
  Eigen::Index parts() const { return alpha_.size(); }

 private:
  Eigen::VectorXd alpha_;
  double alpha0_;
};

/// Logistic-normal with Dirichlet covariance on the alr scale:
/// Sigma = diag(sigma2) + gamma * 11'.
class LndParams {
 public:
  LndParams(Eigen::VectorXd mu, Eigen::VectorXd sigma2, double gamma);

  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& sigma2() const { return sigma2_; }
  double gamma() const { return gamma_; }
  Eigen::MatrixXd covariance() const;

 private:
  Eigen::VectorXd mu_;
  Eigen::VectorXd sigma2_;
  double gamma_;
};

struct DirichletMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd covariance;
};

/// KL-optimal logistic-normal for a Dirichlet, in both the compact
/// (sigma2, gamma) form and as a full covariance.
struct MatchedLogisticNormal {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma2;  // trigamma(alpha_d), d != reference
  double gamma;            // trigamma(alpha_reference)
  Eigen::MatrixXd sigma;
};

enum class DensityScale { Alr, Simplex };

double dirichlet_logpdf(const Composition& y, const DirichletParams& p);

DirichletMoments dirichlet_moments(const DirichletParams& p);

/// The reference category is the last part unless given (1-based).
MatchedLogisticNormal match_ln_to_dirichlet(const DirichletParams& p, int reference = -1);

/// Multivariate normal log density of alr coordinates. On the simplex scale
/// the alr Jacobian -sum_d log y_d (over all D parts) is added so the density
/// integrates to one over S^D.
double lnd_logpdf(const AlrCoords& z, const LndParams& p, DensityScale scale = DensityScale::Alr);

/// General multivariate normal log density on the alr scale (any SPD Sigma).
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// diag(sigma2 + gamma) with gamma off the diagonal.
Eigen::MatrixXd dirichlet_covariance(const Eigen::VectorXd& sigma2, double gamma);

/// Log density of N(x; mu, diag(sigma2) + gamma 11') in O(K) via
/// Sherman-Morrison. Equivalent to mvn_logpdf with dirichlet_covariance.
double dirichlet_cov_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mu,
                            const Eigen::VectorXd& sigma2, double gamma);

Eigen::VectorXd sample_dirichlet(const DirichletParams& p, std::mt19937_64& rng);

}  // namespace lndm

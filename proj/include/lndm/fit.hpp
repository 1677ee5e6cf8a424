#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lndm/gaussian_posterior.hpp"
#include "lndm/hyper_search.hpp"
#include "lndm/mixture.hpp"
#include "lndm/model_spec.hpp"
#include "lndm/stacked_system.hpp"

namespace lndm {

struct FitConfig {
  GridConfig grid;
  std::uint64_t seed = 1;
  /// Draws used for hyperparameter marginal summaries.
  int hyper_samples = 20000;
  /// Warm start on the internal scale; must match the free dimension.
  std::optional<Eigen::VectorXd> start;
};

struct HyperSummary {
  std::string name;       // internal-scale name
  std::string user_name;  // natural-scale name
  bool fixed = false;
  double mode = 0.0;      // natural scale
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

/// Conditional posterior summary at one integration point.
struct GridPoint {
  Eigen::VectorXd theta;  // internal scale, free parameters only
  ModelHyper hyper;
  double log_post = 0.0;
  double delta = 0.0;
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

struct FitResult {
  ModelSpec spec;
  ModelData data;
  std::shared_ptr<const HyperSpace> space;
  /// Range-prior scale actually used.
  double range0 = 1.0;
  HyperGrid grid;
  std::vector<GridPoint> points;
  LatentLayout layout;
  std::vector<HyperSummary> hyper;
  /// Natural-scale hyperparameter draws (one row per draw, one column per
  /// free parameter) behind the summaries.
  Eigen::MatrixXd hyper_draws;
  /// log p(y) from the grid integration.
  double log_marginal_likelihood = 0.0;
  std::vector<std::string> warnings;
  FitConfig config;

  Eigen::Index latent_size() const { return layout.size; }
  StackedSystem system_at(std::size_t point) const;
};

/// Initial hyperparameters from per-coordinate least-squares residuals.
ModelHyper initial_hyper(const ModelData& data, const ModelSpec& spec);

/// 10% of the bounding-box diagonal of the coordinates (1 without coordinates).
double default_range0(const ModelData& data);

/// log p(y | theta) + log p(theta) on the internal scale; -inf where the
/// system cannot be factorized.
double log_posterior(const ModelData& data, const ModelSpec& spec, const HyperSpace& space,
                     const Eigen::VectorXd& theta);

FitResult fit(const ModelData& data, const ModelSpec& spec, const FitConfig& cfg = {});

GaussianMixture latent_marginal(const FitResult& fit, Eigen::Index index);
GaussianMixture latent_marginal(const FitResult& fit, const std::string& name);
/// Mixture means of every latent entry.
Eigen::VectorXd latent_means(const FitResult& fit);

struct PosteriorSamples {
  std::vector<int> point;  // grid point of each draw
  Eigen::MatrixXd latent;  // latent_size x n
  Eigen::Index size() const { return latent.cols(); }
};

PosteriorSamples posterior_samples(const FitResult& fit, int n, std::uint64_t seed);

/// Covariates (intercept column first, standardized like the training data)
/// and, for spatial structures, coordinates of rows to predict.
struct NewRows {
  Eigen::MatrixXd design;
  std::optional<Eigen::MatrixXd> coords;
};

/// Predictive of one new composition's alr vector at one integration point.
struct PredictiveComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  /// Covariance of the linear predictor without the shared effect.
  Eigen::MatrixXd linear_cov;
  /// Full predictive covariance: linear_cov + diag(sigma2) + gamma 11'.
  Eigen::MatrixXd cov;
};

struct PredictiveDistribution {
  std::vector<PredictiveComponent> components;
  /// Univariate predictive of alr coordinate d (0-based).
  GaussianMixture marginal(int d) const;
  double joint_log_density(const Eigen::VectorXd& z) const;
};

/// Exact (mixture over integration points) predictive for each new row; a
/// new unit gets a fresh shared effect u ~ N(0, gamma).
std::vector<PredictiveDistribution> predictive_distribution(const FitResult& fit, const NewRows& rows);

struct Prediction {
  Eigen::MatrixXd eta_mean, eta_sd;  // N_new x K, linear predictor without u
  Eigen::MatrixXd alr_mean, alr_sd, alr_q025, alr_q975;
  Eigen::MatrixXd simplex_mean, simplex_sd, simplex_q025, simplex_q975;  // N_new x D
  int draws = 0;
};

Prediction predict(const FitResult& fit, const NewRows& rows, int draws, std::uint64_t seed);

}  // namespace lndm

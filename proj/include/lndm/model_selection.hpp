#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "lndm/fit.hpp"

namespace lndm {

/// Per-composition log likelihood with the shared effect integrated out:
/// log N(z_n; eta_n, diag(sigma2) + gamma 11'), eta_n excluding u.
Eigen::VectorXd collapsed_loglik(const ModelData& data, const ModelSpec& spec, const LatentLayout& layout,
                                 const ModelHyper& hyper, const Eigen::VectorXd& latent);

/// S x N matrix of collapsed log likelihoods over posterior draws.
Eigen::MatrixXd loglik_matrix(const FitResult& fit, const PosteriorSamples& samples);

struct Criterion {
  double value = 0.0;
  double p_eff = 0.0;
  std::vector<std::string> warnings;
};

/// DIC from a draw-by-composition log-likelihood matrix and the log likelihood
/// at the plug-in point.
Criterion dic_from_loglik(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& plugin_loglik);
Criterion waic_from_loglik(const Eigen::MatrixXd& loglik);

/// Plug-in point: posterior mean of the latent field and of the
/// natural-scale hyperparameters.
Eigen::VectorXd plugin_loglik(const FitResult& fit);

Criterion dic(const FitResult& fit, int samples, std::uint64_t seed);
Criterion waic(const FitResult& fit, int samples, std::uint64_t seed);

enum class CpoMode { Auto, Exact, Importance };

struct CpoConfig {
  CpoMode mode = CpoMode::Auto;
  /// Auto uses exact refits up to this many compositions.
  int exact_max_rows = 50;
  int samples = 4000;
  std::uint64_t seed = 1;
  double cv_threshold = 5.0;
  int threads = 1;
};

struct CpoResult {
  /// N x K predictive ordinates of each observed alr coordinate; NaN rows
  /// for failed refits.
  Eigen::MatrixXd cpo;
  /// Joint leave-one-composition-out log predictive density (diagnostic).
  Eigen::VectorXd joint_log_cpo;
  double lcpo = 0.0;
  bool exact = true;
  std::vector<int> failed;
  /// Importance mode: coefficient of variation of the weights per composition.
  Eigen::VectorXd weight_cv;
  std::vector<int> unstable;
  std::vector<std::string> warnings;
};

/// -mean log CPO over the finite entries.
double lcpo_from(const Eigen::MatrixXd& cpo);

CpoResult cpo_exact(const FitResult& fit, int threads = 1);
CpoResult cpo_importance(const FitResult& fit, int samples, std::uint64_t seed, double cv_threshold = 5.0);
CpoResult cpo_coda(const ModelData& data, const ModelSpec& spec, const FitConfig& fit_cfg, const CpoConfig& cfg);
/// Same, reusing an existing full-data fit.
CpoResult cpo_coda(const FitResult& fit, const CpoConfig& cfg);

struct MetricsConfig {
  int samples = 2000;
  std::uint64_t seed = 1;
  CpoConfig cpo;
  bool compute_cpo = true;
};

struct MetricsReport {
  double dic = 0.0, p_eff_dic = 0.0;
  double waic = 0.0, p_eff_waic = 0.0;
  Eigen::MatrixXd cpo;
  double lcpo = NAN;
  CpoResult cpo_detail;
  std::vector<std::string> warnings;
};

MetricsReport compute_metrics(const FitResult& fit, const MetricsConfig& cfg);

}  // namespace lndm

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace lndm {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct GridConfig {
  /// Spacing of grid points along each eigen-axis, in standard deviations.
  double step = 1.0;
  /// Points per half-axis.
  int steps = 3;
  /// Drop points whose log posterior is more than this below the mode.
  double prune = 6.0;
  int max_iterations = 500;
  /// Nelder-Mead stops when the simplex values span less than this.
  double tolerance = 1e-7;
  double initial_step = 0.5;
  int restarts = 2;
  double fd_step = 1e-3;
  int newton_iterations = 6;
  int threads = 1;
};

struct ModeResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> trace;  // best value after each iteration
};

/// Maximize f by the Nelder-Mead simplex method.
ModeResult nelder_mead(const LogDensity& f, const Eigen::VectorXd& x0, double step, int max_iterations,
                       double tolerance);

Eigen::VectorXd fd_gradient(const LogDensity& f, const Eigen::VectorXd& x, double h);
/// Central-difference Hessian of f (not of -f).
Eigen::MatrixXd fd_hessian(const LogDensity& f, const Eigen::VectorXd& x, double h, double fx);

/// Integration points for the hyperparameter posterior.
///
/// Points lie on the eigen-axes of the negative Hessian at the mode:
/// theta = mode + axes * z, z = +-k*step*s*e_i with s the split-normal scale
/// of that half-axis. Each point carries the volume
/// of the shell of z-radii it stands for, so that sum_t exp(log_post_t) *
/// delta_t approximates the integral of the posterior.
struct HyperGrid {
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> z;
  Eigen::VectorXd log_post;
  Eigen::VectorXd delta;
  Eigen::VectorXd weights;  // normalized exp(log_post) * delta
  Eigen::VectorXd mode;
  double mode_log_post = 0.0;
  /// Negative Hessian of the log posterior at the mode.
  Eigen::MatrixXd mode_hessian;
  /// Columns V_i / sqrt(lambda_i).
  Eigen::MatrixXd axes;
  /// Split-normal scales along each axis in z units.
  Eigen::VectorXd scale_plus;
  Eigen::VectorXd scale_minus;
  int evaluations = 0;
  bool mode_converged = true;
  std::vector<std::string> warnings;

  std::size_t size() const { return points.size(); }
};

/// Mode search followed by the axis grid. Throws OptimizationError when the
/// mode cannot be located.
HyperGrid explore_hyperparameters(const LogDensity& log_post, const Eigen::VectorXd& start, const GridConfig& cfg);

/// Volume of the unit ball in d dimensions.
double unit_ball_volume(int d);

}  // namespace lndm

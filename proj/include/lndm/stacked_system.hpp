#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lndm/model_spec.hpp"
#include "lndm/spatial.hpp"

namespace lndm {

/// Model-ready data: alr responses, design matrix (intercept first) and
/// optional N x 2 coordinates.
struct ModelData {
  Eigen::MatrixXd z;       // N x K alr responses
  Eigen::MatrixXd design;  // N x P, column 0 is the intercept
  std::vector<std::string> design_names;
  std::optional<Eigen::MatrixXd> coords;
  int reference = 0;  // 1-based reference category of z

  Eigen::Index rows() const { return z.rows(); }
  int coordinates() const { return static_cast<int>(z.cols()); }
  /// Rows `keep` only, in the given order.
  ModelData subset(const std::vector<int>& keep) const;
  void validate() const;
};

/// Coordinate-major stacking: entries 0..N-1 hold alr coordinate 1, N..2N-1
/// coordinate 2, and so on.
Eigen::VectorXd stack_response(const Eigen::MatrixXd& z);
Eigen::MatrixXd unstack_response(const Eigen::VectorXd& y, Eigen::Index coordinates);

struct LatentBlock {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

/// Latent layout of a structure on a given data size. Order is fixed:
/// beta (covariate-major: entry m*K + d for per-coordinate betas, m for shared),
/// shared effect u (N), then the spatial block(s).
struct LatentLayout {
  std::vector<LatentBlock> blocks;
  std::vector<std::string> names;  // one per latent entry
  Eigen::Index size = 0;

  const LatentBlock* find(const std::string& name) const;
  const LatentBlock& at(const std::string& name) const;
};

LatentLayout make_layout(const ModelSpec& spec, const std::vector<std::string>& design_names,
                         Eigen::Index rows, int coordinates);

/// Index of beta for design column m and alr coordinate d (both 0-based).
Eigen::Index beta_index(const ModelSpec& spec, int coordinates, Eigen::Index m, int d);

/// The Gaussian linear system at one hyperparameter value:
/// y = A x + e, e ~ N(0, diag(1/obs_precision)), x ~ N(prior_mean, prior_precision^-1).
struct StackedSystem {
  Eigen::Index rows = 0;  // N
  int coordinates = 0;    // K = D - 1
  LatentLayout layout;
  Eigen::VectorXd y;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd obs_precision;
  Eigen::SparseMatrix<double> prior_precision;
  Eigen::VectorXd prior_mean;
  double log_det_prior_precision = 0.0;
  /// Linear constraint c'x = 0 (sum-to-zero on u); empty when absent.
  Eigen::VectorXd constraint;
  /// c' B^-1 c under the prior.
  double constraint_prior_variance = 0.0;
  ModelHyper hyper;
  std::shared_ptr<const MaternField> field;
  bool field_jittered = false;

  Eigen::Index latent_size() const { return layout.size; }
  /// Linear predictor without the shared effect u: one row per composition,
  /// one column per alr coordinate.
  Eigen::MatrixXd predictor_without_shared(const Eigen::VectorXd& x) const;
};

/// Check that the fixed-effect columns have full column rank; throws
/// IdentifiabilityError naming the aliased design columns.
void check_identifiability(const ModelData& data);

StackedSystem build_system(const ModelData& data, const ModelSpec& spec, const ModelHyper& hyper);

/// Linear predictor without the shared effect u for every row of `data`
/// (N x K), from a latent vector laid out by make_layout. `alpha` scales the
/// field per coordinate for proportional structures.
Eigen::MatrixXd predictor_without_shared(const ModelData& data, const ModelSpec& spec, const LatentLayout& layout,
                                         const Eigen::VectorXd& alpha, const Eigen::VectorXd& x);

}  // namespace lndm

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lndm/model_spec.hpp"
#include "lndm/stacked_system.hpp"

namespace lndm {

struct SimulationSpec {
  StructureType structure = StructureType::II;
  /// K x P coefficients, row d for alr coordinate d (intercept first). Shared
  /// structures also accept a single row.
  Eigen::MatrixXd beta;
  ModelHyper hyper;
  Eigen::Index rows = 100;
  /// Coordinates for spatial structures; Uniform on the unit square when absent.
  std::optional<Eigen::MatrixXd> coords;
  std::uint64_t seed = 1;
  /// Draw u and independent noise instead of correlated noise via Cholesky.
  bool augmented = false;
};

struct SimulatedData {
  Eigen::MatrixXd compositions;  // N x D
  Eigen::MatrixXd alr;           // N x K, reference D
  Eigen::MatrixXd covariates;    // N x (P - 1), Uniform(-0.5, 0.5)
  std::vector<std::string> covariate_names;
  std::optional<Eigen::MatrixXd> coords;
  Eigen::MatrixXd eta;           // N x K linear predictor without noise
  Eigen::MatrixXd field;         // N x (0, 1 or K) spatial effect draws

  /// Model-ready view with an intercept column and reference D.
  ModelData model_data() const;
};

SimulatedData simulate_lndm(const SimulationSpec& spec);

}  // namespace lndm

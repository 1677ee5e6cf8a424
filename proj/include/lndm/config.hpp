#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lndm/dataset.hpp"
#include "lndm/fit.hpp"
#include "lndm/model_selection.hpp"
#include "lndm/model_spec.hpp"

namespace lndm {

struct SimulateSettings {
  StructureType structure = StructureType::II;
  Eigen::Index rows = 100;
  Eigen::MatrixXd beta;  // K x P
  Eigen::VectorXd sigma2;
  double gamma = 0.1;
  double sigma_omega = 1.0;
  double range = 0.3;
  double smoothness = 1.0;
  Eigen::VectorXd alpha;  // empty means all ones
  bool augmented = false;
  std::string output = "simulated.csv";
  std::vector<std::string> categories;  // defaults y1..yD
};

/// Everything a CLI run needs, parsed from one JSON document.
struct RunConfig {
  std::string base_dir;  // relative paths resolve against this
  std::uint64_t seed = 1;

  std::string data_path;
  DataSchema schema;
  ModelSpec model;
  FitConfig fit;
  MetricsConfig metrics;
  bool metrics_enabled = true;

  std::string output_dir = "lndm_out";
  int density_points = 101;

  std::string predict_path;
  int predict_draws = 2000;

  std::vector<StructureType> select_structures;

  std::optional<SimulateSettings> simulate;

  /// Path relative to base_dir unless absolute.
  std::string resolve(const std::string& path) const;
};

RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Inverse of parse_config (base_dir excluded).
nlohmann::json config_to_json(const RunConfig& cfg);

std::string cpo_mode_name(CpoMode m);
CpoMode parse_cpo_mode(const std::string& s);

}  // namespace lndm

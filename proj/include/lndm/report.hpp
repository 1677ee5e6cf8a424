#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include <json.hpp>

#include "lndm/fit.hpp"
#include "lndm/model_selection.hpp"

namespace lndm {

struct ReportContext {
  std::vector<std::string> categories;  // D names; defaults to y1..yD
  std::uint64_t seed = 1;
  std::vector<std::string> warnings;    // ingestion warnings to carry along
  /// Covariate standardization applied at ingestion (empty when none).
  std::vector<std::string> covariates;
  Eigen::VectorXd covariate_mean, covariate_sd;
};

/// Machine-readable fit report: latent and hyperparameter summaries, grid
/// diagnostics, metrics and exp(beta) ratio readings.
nlohmann::json fit_report(const FitResult& fit, const MetricsReport* metrics, const ReportContext& ctx);

/// Plot-ready density tables. Columns: name, x, density.
void write_latent_densities(const FitResult& fit, const std::string& path, int points);
void write_hyper_densities(const FitResult& fit, const std::string& path, int points);

void write_json(const std::string& path, const nlohmann::json& j);

struct SelectionRow {
  std::string structure;
  bool ok = false;
  double dic = 0.0, waic = 0.0, lcpo = 0.0;
  std::string error;
};

/// Rows sorted by DIC (failures last), as JSON.
nlohmann::json selection_table(std::vector<SelectionRow> rows);

}  // namespace lndm

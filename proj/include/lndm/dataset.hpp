#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lndm/stacked_system.hpp"

namespace lndm {

/// Header plus raw cells of a comma-separated file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`; throws InputError when absent.
  std::size_t column(const std::string& name) const;
  /// Numeric column; throws InputError on empty or non-numeric cells.
  Eigen::VectorXd numeric(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);
/// Writes a header row then one line per matrix row. Optional leading string
/// columns go first.
void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values,
               const std::vector<std::vector<std::string>>& labels = {});

enum class ZeroPolicy { Strict, Replace };

struct DataSchema {
  std::vector<std::string> categories;
  std::vector<std::string> covariates;
  std::optional<std::array<std::string, 2>> coords;
  ZeroPolicy zero_policy = ZeroPolicy::Strict;
  double zero_epsilon = 1e-6;
};

struct Dataset {
  Eigen::MatrixXd compositions;  // N x D, rows closed
  std::vector<std::string> categories;
  Eigen::MatrixXd covariates;    // N x M, standardized
  std::vector<std::string> covariate_names;
  Eigen::VectorXd covariate_mean;
  Eigen::VectorXd covariate_sd;
  std::optional<Eigen::MatrixXd> coords;
  int replaced_cells = 0;
  std::vector<std::string> warnings;

  Eigen::Index rows() const { return compositions.rows(); }
};

Dataset ingest_table(const CsvTable& table, const DataSchema& schema);
Dataset ingest_csv(const std::string& path, const DataSchema& schema);

/// Model-ready data; reference 0 picks the category with the least log variance.
ModelData to_model_data(const Dataset& ds, int reference);

/// Rows to predict, read from a table holding the schema's covariate (and
/// coordinate) columns, standardized with the training statistics.
struct NewRowsInput {
  Eigen::MatrixXd design;  // intercept first
  std::optional<Eigen::MatrixXd> coords;
};
NewRowsInput new_rows_from_table(const CsvTable& table, const DataSchema& schema, const Dataset& train);

}  // namespace lndm

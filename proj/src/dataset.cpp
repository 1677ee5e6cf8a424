#include "lndm/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lndm/coda.hpp"
#include "lndm/error.hpp"

namespace lndm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  if (cell.empty()) {
    throw InputError("missing value in column '" + column + "' at data row " + std::to_string(row + 1));
  }
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw InputError("non-numeric value '" + cell + "' in column '" + column + "' at data row " +
                     std::to_string(row + 1));
  }
  return v;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("missing column '" + name + "'");
}

Eigen::VectorXd CsvTable::numeric(const std::string& name) const {
  const std::size_t c = column(name);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = parse_number(rows[r][c], r, name);
  return v;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!have_header) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
      if (trim(line).empty()) continue;
      t.header = split_line(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw InputError("data row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InputError("CSV input is empty");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_csv(in);
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values,
               const std::vector<std::vector<std::string>>& labels) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_cell(header[i]);
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    bool first = true;
    if (static_cast<std::size_t>(r) < labels.size()) {
      for (const auto& l : labels[static_cast<std::size_t>(r)]) {
        out << (first ? "" : ",") << csv_cell(l);
        first = false;
      }
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (first ? "" : ",") << values(r, c);
      first = false;
    }
    out << '\n';
  }
}

Dataset ingest_table(const CsvTable& table, const DataSchema& schema) {
  if (schema.categories.size() < 2) throw InputError("data: at least two category columns are required");
  if (table.rows.empty()) throw InsufficientDataError("data: no rows");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto parts = static_cast<Eigen::Index>(schema.categories.size());
  Dataset ds;
  ds.categories = schema.categories;
  Eigen::MatrixXd raw(n, parts);
  for (Eigen::Index d = 0; d < parts; ++d) raw.col(d) = table.numeric(schema.categories[d]);
  if ((raw.array() < 0.0).any()) throw InputError("data: negative category values");
  int zero_rows = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((raw.row(i).array() <= 0.0).any()) ++zero_rows;
  }
  if (zero_rows > 0) {
    if (schema.zero_policy == ZeroPolicy::Strict) {
      throw InputError("data: " + std::to_string(zero_rows) +
                       " row(s) have nonpositive category values (set data.zero_policy to \"replace\")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = raw.row(i).sum();
      if (!(s > 0.0)) throw InputError("data: row " + std::to_string(i + 1) + " has no positive category value");
      raw.row(i) /= s;
    }
    const ZeroReplacement rep = replace_zeros(raw, schema.zero_epsilon);
    raw = rep.compositions;
    ds.replaced_cells = rep.replaced_cells;
    std::ostringstream msg;
    msg << "replaced " << rep.replaced_cells << " zero cell(s) in " << zero_rows << " row(s) with "
        << schema.zero_epsilon << " and re-closed";
    ds.warnings.push_back(msg.str());
  }
  ds.compositions.resize(n, parts);
  for (Eigen::Index i = 0; i < n; ++i) ds.compositions.row(i) = closure(raw.row(i).transpose()).values().transpose();

  const auto m = static_cast<Eigen::Index>(schema.covariates.size());
  ds.covariate_names = schema.covariates;
  ds.covariates.resize(n, m);
  ds.covariate_mean.resize(m);
  ds.covariate_sd.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd v = table.numeric(schema.covariates[j]);
    const double mean = v.mean();
    const double sd = n > 1 ? std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
    if (!(sd > 0.0)) throw InputError("zero variance covariate '" + schema.covariates[j] + "'");
    ds.covariate_mean[j] = mean;
    ds.covariate_sd[j] = sd;
    ds.covariates.col(j) = (v.array() - mean) / sd;
  }
  if (schema.coords) {
    Eigen::MatrixXd c(n, 2);
    c.col(0) = table.numeric((*schema.coords)[0]);
    c.col(1) = table.numeric((*schema.coords)[1]);
    const int moved = jitter_duplicate_coords(c);
    if (moved > 0) ds.warnings.push_back("jittered " + std::to_string(moved) + " duplicate location(s) by 1e-8");
    ds.coords = c;
  }
  return ds;
}

Dataset ingest_csv(const std::string& path, const DataSchema& schema) { return ingest_table(read_csv(path), schema); }

ModelData to_model_data(const Dataset& ds, int reference) {
  ModelData d;
  const auto parts = static_cast<int>(ds.compositions.cols());
  if (reference < 0 || reference > parts) {
    throw IndexError("reference category " + std::to_string(reference) + " out of range 1.." + std::to_string(parts));
  }
  d.reference = reference > 0 ? reference : suggest_reference(ds.compositions);
  d.z = alr_rows(ds.compositions, d.reference);
  d.design.resize(ds.rows(), ds.covariates.cols() + 1);
  d.design.col(0).setOnes();
  d.design.rightCols(ds.covariates.cols()) = ds.covariates;
  d.design_names.push_back("intercept");
  for (const auto& n : ds.covariate_names) d.design_names.push_back(n);
  d.coords = ds.coords;
  return d;
}

NewRowsInput new_rows_from_table(const CsvTable& table, const DataSchema& schema, const Dataset& train) {
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  NewRowsInput out;
  out.design.resize(n, train.covariates.cols() + 1);
  out.design.col(0).setOnes();
  for (Eigen::Index j = 0; j < train.covariates.cols(); ++j) {
    const Eigen::VectorXd v = table.numeric(train.covariate_names[j]);
    out.design.col(j + 1) = (v.array() - train.covariate_mean[j]) / train.covariate_sd[j];
  }
  if (schema.coords && train.coords) {
    Eigen::MatrixXd c(n, 2);
    c.col(0) = table.numeric((*schema.coords)[0]);
    c.col(1) = table.numeric((*schema.coords)[1]);
    out.coords = c;
  }
  return out;
}

}  // namespace lndm

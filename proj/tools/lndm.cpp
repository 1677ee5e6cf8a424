// Batch command line front end: simulate, fit, predict, select, cv.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>

#include "lndm/config.hpp"
#include "lndm/dataset.hpp"
#include "lndm/error.hpp"
#include "lndm/fit.hpp"
#include "lndm/model_selection.hpp"
#include "lndm/parallel.hpp"
#include "lndm/report.hpp"
#include "lndm/sim.hpp"

namespace fs = std::filesystem;
using namespace lndm;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

RunConfig prepare(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  const int threads = o.threads ? *o.threads : default_threads();
  c.fit.seed = c.seed;
  c.fit.grid.threads = threads;
  c.metrics.seed = c.seed;
  c.metrics.cpo.seed = c.seed;
  c.metrics.cpo.threads = threads;
  if (!o.out.empty()) {
    c.output_dir = o.out;
  } else {
    c.output_dir = c.resolve(c.output_dir);
  }
  return c;
}

void warn_all(const std::vector<std::string>& w) {
  for (const auto& s : w) spdlog::warn("{}", s);
}

struct Loaded {
  Dataset ds;
  ModelData data;
};

Loaded load_data(const RunConfig& c) {
  if (c.data_path.empty()) throw InputError("config: data.path is required");
  Loaded l;
  l.ds = ingest_csv(c.resolve(c.data_path), c.schema);
  warn_all(l.ds.warnings);
  if (spatial_kind(c.model.structure) != SpatialKind::None && !l.ds.coords) {
    throw InputError("structure " + to_string(c.model.structure) + " needs data.coords");
  }
  l.data = to_model_data(l.ds, c.model.reference);
  return l;
}

void write_fit_outputs(const RunConfig& c, const Loaded& l, const FitResult& f, const MetricsReport* m) {
  fs::create_directories(c.output_dir);
  ReportContext ctx{l.ds.categories, c.seed, l.ds.warnings, l.ds.covariate_names, l.ds.covariate_mean,
                    l.ds.covariate_sd};
  write_json((fs::path(c.output_dir) / "report.json").string(), fit_report(f, m, ctx));
  write_latent_densities(f, (fs::path(c.output_dir) / "latent_densities.csv").string(), c.density_points);
  write_hyper_densities(f, (fs::path(c.output_dir) / "hyper_densities.csv").string(), c.density_points);
}

int cmd_simulate(const Options& o) {
  const RunConfig c = prepare(o);
  if (!c.simulate) throw InputError("config: a 'simulate' section is required");
  const auto& s = *c.simulate;
  SimulationSpec spec;
  spec.structure = s.structure;
  spec.beta = s.beta;
  spec.rows = s.rows;
  spec.seed = c.seed;
  spec.augmented = s.augmented;
  const auto k = s.sigma2.size();
  spec.hyper.sigma2 = s.sigma2;
  spec.hyper.gamma = s.gamma;
  spec.hyper.alpha = s.alpha.size() > 0 ? s.alpha : Eigen::VectorXd::Ones(k);
  if (spatial_kind(s.structure) != SpatialKind::None) spec.hyper.spatial = SpatialHyper{s.sigma_omega, s.range, s.smoothness};
  const SimulatedData sim = simulate_lndm(spec);

  std::vector<std::string> header = s.categories;
  if (header.empty()) {
    for (Eigen::Index d = 1; d <= k + 1; ++d) header.push_back("y" + std::to_string(d));
  }
  if (static_cast<Eigen::Index>(header.size()) != k + 1) throw InputError("simulate.categories must name D = K + 1 parts");
  Eigen::MatrixXd table = sim.compositions;
  for (const auto& n : sim.covariate_names) header.push_back(n);
  table.conservativeResize(Eigen::NoChange, table.cols() + sim.covariates.cols());
  table.rightCols(sim.covariates.cols()) = sim.covariates;
  if (sim.coords) {
    header.push_back("x_coord");
    header.push_back("y_coord");
    table.conservativeResize(Eigen::NoChange, table.cols() + 2);
    table.rightCols(2) = *sim.coords;
  }
  const std::string path = o.out.empty() ? c.resolve(s.output) : o.out;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  write_csv(path, header, table);
  std::cout << "wrote " << sim.compositions.rows() << " rows to " << path << '\n';
  return 0;
}

int cmd_fit(const Options& o) {
  const RunConfig c = prepare(o);
  const Loaded l = load_data(c);
  const FitResult f = fit(l.data, c.model, c.fit);
  warn_all(f.warnings);
  std::optional<MetricsReport> m;
  if (c.metrics_enabled) {
    m = compute_metrics(f, c.metrics);
    warn_all(m->warnings);
  }
  write_fit_outputs(c, l, f, m ? &*m : nullptr);
  std::cout << "fit written to " << c.output_dir << '\n';
  return 0;
}

int cmd_predict(const Options& o) {
  const RunConfig c = prepare(o);
  if (c.predict_path.empty()) throw InputError("config: predict.path is required");
  const Loaded l = load_data(c);
  const FitResult f = fit(l.data, c.model, c.fit);
  warn_all(f.warnings);
  const NewRowsInput in = new_rows_from_table(read_csv(c.resolve(c.predict_path)), c.schema, l.ds);
  const Prediction p = predict(f, NewRows{in.design, in.coords}, c.predict_draws, c.seed);

  fs::create_directories(c.output_dir);
  const int k = l.data.coordinates();
  const int ref = l.data.reference;
  std::vector<std::string> header{"row"};
  const Eigen::Index n = p.simplex_mean.rows();
  Eigen::MatrixXd table(n, 4 * (k + 1) + 4 * k);
  Eigen::Index col = 0;
  for (int d = 0; d <= k; ++d) {
    const std::string cat = l.ds.categories[static_cast<std::size_t>(d)];
    for (const char* stat : {"mean", "sd", "q025", "q975"}) header.push_back(cat + "_" + stat);
    table.col(col++) = p.simplex_mean.col(d);
    table.col(col++) = p.simplex_sd.col(d);
    table.col(col++) = p.simplex_q025.col(d);
    table.col(col++) = p.simplex_q975.col(d);
  }
  for (int d = 0; d < k; ++d) {
    const int idx = d < ref - 1 ? d : d + 1;
    const std::string name = "alr_" + l.ds.categories[static_cast<std::size_t>(idx)];
    for (const char* stat : {"mean", "sd", "q025", "q975"}) header.push_back(name + "_" + stat);
    table.col(col++) = p.alr_mean.col(d);
    table.col(col++) = p.alr_sd.col(d);
    table.col(col++) = p.alr_q025.col(d);
    table.col(col++) = p.alr_q975.col(d);
  }
  std::vector<std::vector<std::string>> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back({std::to_string(i + 1)});
  write_csv((fs::path(c.output_dir) / "predictions.csv").string(), header, table, labels);
  std::cout << "predictions for " << n << " rows written to " << c.output_dir << '\n';
  return 0;
}

int cmd_select(const Options& o) {
  RunConfig c = prepare(o);
  if (c.select_structures.size() < 2) throw InputError("config: select.structures must list at least two structures");
  const Loaded base = load_data(c);
  std::vector<SelectionRow> rows;
  int failures = 0;
  for (StructureType s : c.select_structures) {
    SelectionRow r;
    r.structure = to_string(s);
    try {
      ModelSpec spec = c.model;
      spec.structure = s;
      const FitResult f = fit(base.data, spec, c.fit);
      warn_all(f.warnings);
      const MetricsReport m = compute_metrics(f, c.metrics);
      r.ok = true;
      r.dic = m.dic;
      r.waic = m.waic;
      r.lcpo = m.lcpo;
    } catch (const Error& e) {
      r.error = e.what();
      ++failures;
      spdlog::warn("structure {} failed: {}", r.structure, e.what());
    }
    rows.push_back(r);
  }
  fs::create_directories(c.output_dir);
  const auto table = selection_table(rows);
  write_json((fs::path(c.output_dir) / "selection.json").string(), table);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.size()), 3);
  std::vector<std::vector<std::string>> labels;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    labels.push_back({r["structure"].get<std::string>()});
    const auto row = static_cast<Eigen::Index>(i);
    int col = 0;
    for (const char* key : {"dic", "waic", "lcpo"}) {
      values(row, col++) = r.contains(key) && r[key].is_number() ? r[key].get<double>() : NAN;
    }
  }
  write_csv((fs::path(c.output_dir) / "selection.csv").string(), {"structure", "dic", "waic", "lcpo"}, values, labels);
  std::cout << "structure  DIC  WAIC  LCPO\n";
  for (const auto& r : table) {
    if (r.contains("error")) {
      std::cout << r["structure"].get<std::string>() << "  failed: " << r["error"].get<std::string>() << '\n';
    } else {
      std::cout << r["structure"].get<std::string>() << "  " << r["dic"] << "  " << r["waic"] << "  " << r["lcpo"] << '\n';
    }
  }
  return failures == static_cast<int>(rows.size()) ? 2 : 0;
}

int cmd_cv(const Options& o) {
  RunConfig c = prepare(o);
  const Loaded l = load_data(c);
  const FitResult f = fit(l.data, c.model, c.fit);
  CpoConfig cc = c.metrics.cpo;
  if (cc.mode == CpoMode::Auto) cc.mode = CpoMode::Exact;
  const CpoResult r = cpo_coda(f, cc);
  warn_all(r.warnings);
  fs::create_directories(c.output_dir);
  std::vector<std::string> header{"row"};
  const int k = l.data.coordinates();
  for (int d = 0; d < k; ++d) header.push_back("cpo_" + std::to_string(d + 1));
  header.push_back("joint_log_cpo");
  Eigen::MatrixXd table(r.cpo.rows(), k + 1);
  table.leftCols(k) = r.cpo;
  table.col(k) = r.joint_log_cpo;
  std::vector<std::vector<std::string>> labels;
  for (Eigen::Index i = 0; i < table.rows(); ++i) labels.push_back({std::to_string(i + 1)});
  write_csv((fs::path(c.output_dir) / "cpo.csv").string(), header, table, labels);
  write_json((fs::path(c.output_dir) / "cv.json").string(),
             nlohmann::json{{"lcpo", r.lcpo}, {"exact", r.exact}, {"failed", r.failed}, {"warnings", r.warnings}});
  std::cout << "LCPO " << r.lcpo << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("lndm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Logistic-normal Dirichlet models for compositional data"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  int threads = 0;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-s,--seed", seed, "override the configured seed");
    sub->add_option("-t,--threads", threads, "worker threads (default: LNDM_THREADS or 1)");
    sub->add_option("-o,--out", o.out, "output directory (simulate: output file)");
    return sub;
  };
  auto* sim = add("simulate", "simulate a dataset from the 'simulate' section");
  auto* fitc = add("fit", "fit the model and write report.json plus density CSVs");
  auto* pred = add("predict", "fit, then predict the rows in predict.path");
  auto* sel = add("select", "fit every structure in select.structures and rank them by DIC");
  auto* cv = add("cv", "exact leave-one-composition-out CPO");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (auto* sub : {sim, fitc, pred, sel, cv}) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--threads")) o.threads = threads;
  }
  try {
    if (*sim) return cmd_simulate(o);
    if (*fitc) return cmd_fit(o);
    if (*pred) return cmd_predict(o);
    if (*sel) return cmd_select(o);
    if (*cv) return cmd_cv(o);
  } catch (const UserError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const NumericalError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

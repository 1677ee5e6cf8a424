#include "lndm/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "lndm/error.hpp"

namespace lndm {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos do not pass silently.
void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw InputError("config: unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::VectorXd to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError("config: '" + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json from_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

PcPrior read_pc(const json& j, const std::string& where) {
  check_keys(j, where, {"u", "alpha"});
  PcPrior p;
  read(j, "u", p.u);
  read(j, "alpha", p.alpha);
  return p;
}

json write_pc(const PcPrior& p) { return json{{"u", p.u}, {"alpha", p.alpha}}; }

std::string zero_policy_name(ZeroPolicy p) { return p == ZeroPolicy::Strict ? "strict" : "replace"; }

}  // namespace

std::string cpo_mode_name(CpoMode m) {
  switch (m) {
    case CpoMode::Auto:
      return "auto";
    case CpoMode::Exact:
      return "exact";
    case CpoMode::Importance:
      return "importance";
  }
  return "auto";
}

CpoMode parse_cpo_mode(const std::string& s) {
  if (s == "auto") return CpoMode::Auto;
  if (s == "exact") return CpoMode::Exact;
  if (s == "importance") return CpoMode::Importance;
  throw InputError("config: metrics.cpo must be auto, exact or importance, got '" + s + "'");
}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

RunConfig parse_config(const json& j, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    check_keys(j, "<root>", {"seed", "data", "model", "inference", "metrics", "output", "predict", "select", "simulate"});
    read(j, "seed", c.seed);

    if (j.contains("data")) {
      const json& d = j.at("data");
      check_keys(d, "data", {"path", "categories", "coords", "zero_policy", "zero_epsilon"});
      read(d, "path", c.data_path);
      read(d, "categories", c.schema.categories);
      if (d.contains("coords")) {
        const auto xy = d.at("coords").get<std::vector<std::string>>();
        if (xy.size() != 2) throw InputError("config: data.coords must name two columns");
        c.schema.coords = std::array<std::string, 2>{xy[0], xy[1]};
      }
      std::string zp = "strict";
      read(d, "zero_policy", zp);
      if (zp == "strict") {
        c.schema.zero_policy = ZeroPolicy::Strict;
      } else if (zp == "replace") {
        c.schema.zero_policy = ZeroPolicy::Replace;
      } else {
        throw InputError("config: data.zero_policy must be strict or replace");
      }
      read(d, "zero_epsilon", c.schema.zero_epsilon);
      if (!(c.schema.zero_epsilon > 0.0)) throw InputError("config: data.zero_epsilon must be positive");
    }

    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, "model",
                 {"structure", "covariates", "reference", "shared_effect", "sum_to_zero", "smoothness", "fixed", "priors"});
      if (m.contains("structure")) c.model.structure = parse_structure(m.at("structure").get<std::string>());
      read(m, "covariates", c.model.covariates);
      read(m, "reference", c.model.reference);
      read(m, "shared_effect", c.model.shared_effect);
      read(m, "sum_to_zero", c.model.sum_to_zero);
      read(m, "smoothness", c.model.smoothness);
      if (m.contains("fixed")) c.model.fixed = m.at("fixed").get<std::map<std::string, double>>();
      if (m.contains("priors")) {
        const json& p = m.at("priors");
        check_keys(p, "model.priors",
                   {"beta_mean", "beta_variance", "beta_means", "beta_variances", "sigma", "sqrt_gamma", "sigma_omega",
                    "range", "alpha_mean", "alpha_variance"});
        auto& pr = c.model.priors;
        read(p, "beta_mean", pr.beta_mean);
        read(p, "beta_variance", pr.beta_variance);
        read(p, "beta_means", pr.beta_means);
        read(p, "beta_variances", pr.beta_variances);
        if (p.contains("sigma")) {
          for (const auto& s : p.at("sigma")) pr.sigma.push_back(read_pc(s, "model.priors.sigma[]"));
        }
        if (p.contains("sqrt_gamma")) pr.sqrt_gamma = read_pc(p.at("sqrt_gamma"), "model.priors.sqrt_gamma");
        if (p.contains("sigma_omega")) pr.sigma_omega = read_pc(p.at("sigma_omega"), "model.priors.sigma_omega");
        if (p.contains("range")) {
          const json& r = p.at("range");
          check_keys(r, "model.priors.range", {"range0", "alpha0"});
          read(r, "range0", pr.range.range0);
          read(r, "alpha0", pr.range.alpha0);
        }
        read(p, "alpha_mean", pr.alpha_mean);
        read(p, "alpha_variance", pr.alpha_variance);
      }
      c.model.validate();
    }
    c.schema.covariates = c.model.covariates;

    if (j.contains("inference")) {
      const json& i = j.at("inference");
      check_keys(i, "inference",
                 {"grid_step", "grid_steps", "prune", "max_iterations", "tolerance", "initial_step", "restarts", "fd_step",
                  "newton_iterations", "hyper_samples"});
      auto& g = c.fit.grid;
      read(i, "grid_step", g.step);
      read(i, "grid_steps", g.steps);
      read(i, "prune", g.prune);
      read(i, "max_iterations", g.max_iterations);
      read(i, "tolerance", g.tolerance);
      read(i, "initial_step", g.initial_step);
      read(i, "restarts", g.restarts);
      read(i, "fd_step", g.fd_step);
      read(i, "newton_iterations", g.newton_iterations);
      read(i, "hyper_samples", c.fit.hyper_samples);
      if (!(g.step > 0.0) || g.steps < 0 || !(g.prune > 0.0) || g.max_iterations < 1 || !(g.fd_step > 0.0) ||
          !(g.tolerance > 0.0) || !(g.initial_step > 0.0) || c.fit.hyper_samples < 1) {
        throw InputError("config: inference settings out of range");
      }
    }

    if (j.contains("metrics")) {
      const json& m = j.at("metrics");
      check_keys(m, "metrics", {"enabled", "samples", "cpo", "cpo_samples", "exact_max_rows", "cv_threshold"});
      read(m, "enabled", c.metrics_enabled);
      read(m, "samples", c.metrics.samples);
      if (m.contains("cpo")) {
        const std::string mode = m.at("cpo").get<std::string>();
        if (mode == "none") {
          c.metrics.compute_cpo = false;
        } else {
          c.metrics.cpo.mode = parse_cpo_mode(mode);
        }
      }
      read(m, "cpo_samples", c.metrics.cpo.samples);
      read(m, "exact_max_rows", c.metrics.cpo.exact_max_rows);
      read(m, "cv_threshold", c.metrics.cpo.cv_threshold);
      if (c.metrics.samples < 1 || c.metrics.cpo.samples < 1) throw InputError("config: metrics samples must be positive");
    }

    if (j.contains("output")) {
      const json& o = j.at("output");
      check_keys(o, "output", {"dir", "density_points"});
      read(o, "dir", c.output_dir);
      read(o, "density_points", c.density_points);
      if (c.density_points < 2) throw InputError("config: output.density_points must be at least 2");
    }

    if (j.contains("predict")) {
      const json& p = j.at("predict");
      check_keys(p, "predict", {"path", "draws"});
      read(p, "path", c.predict_path);
      read(p, "draws", c.predict_draws);
      if (c.predict_draws < 2) throw InputError("config: predict.draws must be at least 2");
    }

    if (j.contains("select")) {
      const json& s = j.at("select");
      check_keys(s, "select", {"structures"});
      for (const auto& name : s.at("structures")) c.select_structures.push_back(parse_structure(name.get<std::string>()));
    }

    if (j.contains("simulate")) {
      const json& s = j.at("simulate");
      check_keys(s, "simulate",
                 {"structure", "rows", "beta", "sigma2", "gamma", "sigma_omega", "range", "smoothness", "alpha",
                  "augmented", "output", "categories"});
      SimulateSettings sim;
      if (s.contains("structure")) sim.structure = parse_structure(s.at("structure").get<std::string>());
      read(s, "rows", sim.rows);
      if (!s.contains("beta") || !s.contains("sigma2")) throw InputError("config: simulate needs beta and sigma2");
      const json& b = s.at("beta");
      if (!b.is_array() || b.empty()) throw InputError("config: simulate.beta must be a non-empty array of rows");
      const std::size_t p = b[0].size();
      sim.beta.resize(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(p));
      for (std::size_t r = 0; r < b.size(); ++r) {
        if (b[r].size() != p) throw InputError("config: simulate.beta rows must have equal length");
        sim.beta.row(static_cast<Eigen::Index>(r)) = to_vector(b[r], "simulate.beta").transpose();
      }
      sim.sigma2 = to_vector(s.at("sigma2"), "simulate.sigma2");
      read(s, "gamma", sim.gamma);
      read(s, "sigma_omega", sim.sigma_omega);
      read(s, "range", sim.range);
      read(s, "smoothness", sim.smoothness);
      if (s.contains("alpha")) sim.alpha = to_vector(s.at("alpha"), "simulate.alpha");
      read(s, "augmented", sim.augmented);
      read(s, "output", sim.output);
      read(s, "categories", sim.categories);
      c.simulate = sim;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  json data{{"path", c.data_path},
            {"categories", c.schema.categories},
            {"zero_policy", zero_policy_name(c.schema.zero_policy)},
            {"zero_epsilon", c.schema.zero_epsilon}};
  if (c.schema.coords) data["coords"] = std::vector<std::string>{(*c.schema.coords)[0], (*c.schema.coords)[1]};
  j["data"] = data;

  const auto& pr = c.model.priors;
  json sigma = json::array();
  for (const auto& p : pr.sigma) sigma.push_back(write_pc(p));
  j["model"] = json{{"structure", to_string(c.model.structure)},
                    {"covariates", c.model.covariates},
                    {"reference", c.model.reference},
                    {"shared_effect", c.model.shared_effect},
                    {"sum_to_zero", c.model.sum_to_zero},
                    {"smoothness", c.model.smoothness},
                    {"fixed", c.model.fixed},
                    {"priors",
                     {{"beta_mean", pr.beta_mean},
                      {"beta_variance", pr.beta_variance},
                      {"beta_means", pr.beta_means},
                      {"beta_variances", pr.beta_variances},
                      {"sigma", sigma},
                      {"sqrt_gamma", write_pc(pr.sqrt_gamma)},
                      {"sigma_omega", write_pc(pr.sigma_omega)},
                      {"range", {{"range0", pr.range.range0}, {"alpha0", pr.range.alpha0}}},
                      {"alpha_mean", pr.alpha_mean},
                      {"alpha_variance", pr.alpha_variance}}}};
  const auto& g = c.fit.grid;
  j["inference"] = json{{"grid_step", g.step},
                        {"grid_steps", g.steps},
                        {"prune", g.prune},
                        {"max_iterations", g.max_iterations},
                        {"tolerance", g.tolerance},
                        {"initial_step", g.initial_step},
                        {"restarts", g.restarts},
                        {"fd_step", g.fd_step},
                        {"newton_iterations", g.newton_iterations},
                        {"hyper_samples", c.fit.hyper_samples}};
  j["metrics"] = json{{"enabled", c.metrics_enabled},
                      {"samples", c.metrics.samples},
                      {"cpo", c.metrics.compute_cpo ? cpo_mode_name(c.metrics.cpo.mode) : std::string("none")},
                      {"cpo_samples", c.metrics.cpo.samples},
                      {"exact_max_rows", c.metrics.cpo.exact_max_rows},
                      {"cv_threshold", c.metrics.cpo.cv_threshold}};
  j["output"] = json{{"dir", c.output_dir}, {"density_points", c.density_points}};
  j["predict"] = json{{"path", c.predict_path}, {"draws", c.predict_draws}};
  json structures = json::array();
  for (auto s : c.select_structures) structures.push_back(to_string(s));
  j["select"] = json{{"structures", structures}};
  if (c.simulate) {
    const auto& s = *c.simulate;
    json beta = json::array();
    for (Eigen::Index r = 0; r < s.beta.rows(); ++r) beta.push_back(from_vector(s.beta.row(r).transpose()));
    json sim{{"structure", to_string(s.structure)},
             {"rows", s.rows},
             {"beta", beta},
             {"sigma2", from_vector(s.sigma2)},
             {"gamma", s.gamma},
             {"sigma_omega", s.sigma_omega},
             {"range", s.range},
             {"smoothness", s.smoothness},
             {"augmented", s.augmented},
             {"output", s.output},
             {"categories", s.categories}};
    if (s.alpha.size() > 0) sim["alpha"] = from_vector(s.alpha);
    j["simulate"] = sim;
  }
  return j;
}

}  // namespace lndm

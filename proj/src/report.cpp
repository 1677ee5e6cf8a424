#include "lndm/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lndm/dataset.hpp"
#include "lndm/error.hpp"

namespace lndm {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json mixture_summary(const std::string& name, const GaussianMixture& m) {
  return json{{"name", name},
              {"mean", number(m.mean())},
              {"sd", number(m.sd())},
              {"q025", number(m.quantile(0.025))},
              {"q50", number(m.quantile(0.5))},
              {"q975", number(m.quantile(0.975))}};
}

std::vector<std::string> category_names(const FitResult& fit, const ReportContext& ctx) {
  const int parts = fit.data.coordinates() + 1;
  if (static_cast<int>(ctx.categories.size()) == parts) return ctx.categories;
  std::vector<std::string> names;
  for (int d = 1; d <= parts; ++d) names.push_back("y" + std::to_string(d));
  return names;
}

// Category name of alr coordinate d (0-based) given the 1-based reference.
std::string coordinate_category(const std::vector<std::string>& cats, int reference, int d) {
  const int idx = d < reference - 1 ? d : d + 1;
  return cats[static_cast<std::size_t>(idx)];
}

}  // namespace

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

json fit_report(const FitResult& fit, const MetricsReport* metrics, const ReportContext& ctx) {
  json r;
  const auto cats = category_names(fit, ctx);
  const int k = fit.data.coordinates();
  const int ref = fit.data.reference > 0 ? fit.data.reference : k + 1;

  r["model"] = json{{"structure", to_string(fit.spec.structure)},
                    {"reference", ref},
                    {"reference_category", cats[static_cast<std::size_t>(ref - 1)]},
                    {"categories", cats},
                    {"design", fit.data.design_names},
                    {"rows", fit.data.rows()},
                    {"latent_size", fit.latent_size()},
                    {"shared_effect", fit.spec.shared_effect},
                    {"sum_to_zero", fit.spec.sum_to_zero},
                    {"seed", ctx.seed}};

  json fixed = json::array(), random = json::array();
  for (const auto& block : fit.layout.blocks) {
    for (Eigen::Index j = block.offset; j < block.offset + block.size; ++j) {
      json s = mixture_summary(fit.layout.names[static_cast<std::size_t>(j)], latent_marginal(fit, j));
      (block.name == "beta" ? fixed : random).push_back(s);
    }
  }
  r["fixed_effects"] = fixed;
  json scaling = json::array();
  for (std::size_t m = 0; m < ctx.covariates.size(); ++m) {
    const auto i = static_cast<Eigen::Index>(m);
    scaling.push_back({{"name", ctx.covariates[m]}, {"mean", ctx.covariate_mean[i]}, {"sd", ctx.covariate_sd[i]}});
  }
  r["standardization"] = scaling;
  r["random_effects"] = random;

  // exp(beta): multiplicative change in y_d / y_ref per unit (one sd) of the covariate
  json ratios = json::array();
  for (Eigen::Index m = 0; m < fit.data.design.cols(); ++m) {
    for (int d = 0; d < k; ++d) {
      const auto b = beta_index(fit.spec, k, m, d);
      const GaussianMixture g = latent_marginal(fit, b);
      double mean_exp = 0.0;
      for (Eigen::Index t = 0; t < g.weights().size(); ++t) {
        mean_exp += g.weights()[t] * std::exp(g.means()[t] + 0.5 * g.variances()[t]);
      }
      ratios.push_back(json{{"term", fit.data.design_names[static_cast<std::size_t>(m)]},
                            {"category", coordinate_category(cats, ref, d)},
                            {"reference_category", cats[static_cast<std::size_t>(ref - 1)]},
                            {"latent", fit.layout.names[static_cast<std::size_t>(b)]},
                            {"mean", number(mean_exp)},
                            {"q025", number(std::exp(g.quantile(0.025)))},
                            {"q50", number(std::exp(g.quantile(0.5)))},
                            {"q975", number(std::exp(g.quantile(0.975)))}});
    }
  }
  r["ratios"] = ratios;

  json hyper = json::array();
  for (const auto& h : fit.hyper) {
    hyper.push_back(json{{"name", h.user_name},
                         {"internal", h.name},
                         {"fixed", h.fixed},
                         {"mode", number(h.mode)},
                         {"mean", number(h.mean)},
                         {"sd", number(h.sd)},
                         {"q025", number(h.q025)},
                         {"q50", number(h.q50)},
                         {"q975", number(h.q975)}});
  }
  r["hyperparameters"] = hyper;

  const auto& g = fit.grid;
  json mode = json::array();
  for (Eigen::Index i = 0; i < g.mode.size(); ++i) mode.push_back(g.mode[i]);
  json eig = json::array();
  if (g.mode.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.mode_hessian);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) eig.push_back(es.eigenvalues()[i]);
  }
  json weights = json::array();
  for (Eigen::Index i = 0; i < g.weights.size(); ++i) weights.push_back(g.weights[i]);
  r["grid"] = json{{"points", g.size()},
                   {"evaluations", g.evaluations},
                   {"mode_internal", mode},
                   {"mode_log_posterior", g.mode_log_post},
                   {"hessian_eigenvalues", eig},
                   {"weights", weights},
                   {"log_marginal_likelihood", fit.log_marginal_likelihood}};

  std::vector<std::string> warnings = ctx.warnings;
  warnings.insert(warnings.end(), fit.warnings.begin(), fit.warnings.end());
  if (metrics) {
    r["metrics"] = json{{"dic", number(metrics->dic)}, {"waic", number(metrics->waic)}, {"lcpo", number(metrics->lcpo)}};
    const auto& c = metrics->cpo_detail;
    r["metrics_detail"] = json{{"p_eff_dic", number(metrics->p_eff_dic)},
                               {"p_eff_waic", number(metrics->p_eff_waic)},
                               {"cpo_mode", c.cpo.size() == 0 ? "none" : (c.exact ? "exact" : "importance")},
                               {"cpo_failed", c.failed},
                               {"cpo_unstable", c.unstable}};
    warnings.insert(warnings.end(), metrics->warnings.begin(), metrics->warnings.end());
  }
  r["warnings"] = warnings;
  return r;
}

void write_latent_densities(const FitResult& fit, const std::string& path, int points) {
  std::vector<std::vector<std::string>> labels;
  std::vector<double> values;
  const auto& beta = fit.layout.at("beta");
  for (Eigen::Index j = beta.offset; j < beta.offset + beta.size; ++j) {
    const GaussianMixture g = latent_marginal(fit, j);
    const double lo = g.quantile(0.0005), hi = g.quantile(0.9995);
    for (int i = 0; i < points; ++i) {
      const double x = lo + (hi - lo) * i / (points - 1);
      labels.push_back({fit.layout.names[static_cast<std::size_t>(j)]});
      values.push_back(x);
      values.push_back(g.pdf(x));
    }
  }
  const Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>> m(
      values.data(), static_cast<Eigen::Index>(values.size() / 2), 2);
  write_csv(path, {"name", "x", "density"}, m, labels);
}

void write_hyper_densities(const FitResult& fit, const std::string& path, int points) {
  std::vector<std::vector<std::string>> labels;
  std::vector<double> values;
  for (int i = 0; i < fit.space->free_dim(); ++i) {
    Eigen::VectorXd col = fit.hyper_draws.col(i);
    std::vector<double> v(col.data(), col.data() + col.size());
    std::sort(v.begin(), v.end());
    const double lo = v[static_cast<std::size_t>(0.005 * (v.size() - 1))];
    const double hi = v[static_cast<std::size_t>(0.995 * (v.size() - 1))];
    if (!(hi > lo)) continue;
    const double width = (hi - lo) / points;
    std::vector<double> counts(static_cast<std::size_t>(points), 0.0);
    for (double x : v) {
      if (x < lo || x > hi) continue;
      const auto b = std::min<std::size_t>(static_cast<std::size_t>((x - lo) / width), counts.size() - 1);
      counts[b] += 1.0;
    }
    for (int b = 0; b < points; ++b) {
      labels.push_back({fit.space->free_param(i).user_name});
      values.push_back(lo + (b + 0.5) * width);
      values.push_back(counts[static_cast<std::size_t>(b)] / (static_cast<double>(v.size()) * width));
    }
  }
  const Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>> m(
      values.data(), static_cast<Eigen::Index>(values.size() / 2), 2);
  write_csv(path, {"name", "x", "density"}, m, labels);
}

json selection_table(std::vector<SelectionRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SelectionRow& a, const SelectionRow& b) {
    if (a.ok != b.ok) return a.ok;
    return a.ok && a.dic < b.dic;
  });
  json t = json::array();
  for (const auto& r : rows) {
    if (r.ok) {
      t.push_back(json{{"structure", r.structure}, {"dic", number(r.dic)}, {"waic", number(r.waic)}, {"lcpo", number(r.lcpo)}});
    } else {
      t.push_back(json{{"structure", r.structure}, {"error", r.error}});
    }
  }
  return t;
}

}  // namespace lndm

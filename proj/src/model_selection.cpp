#include "lndm/model_selection.hpp"

#include <cmath>
#include <sstream>

#include "lndm/distributions.hpp"
#include "lndm/error.hpp"
#include "lndm/parallel.hpp"

namespace lndm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double normal_logpdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

}  // namespace

Eigen::VectorXd collapsed_loglik(const ModelData& data, const ModelSpec& spec, const LatentLayout& layout,
                                 const ModelHyper& hyper, const Eigen::VectorXd& latent) {
  if (hyper.sigma2.size() != data.coordinates()) throw DimensionError("collapsed_loglik: sigma2 has wrong length");
  const Eigen::MatrixXd eta = predictor_without_shared(data, spec, layout, hyper.alpha, latent);
  Eigen::VectorXd ll(data.rows());
  for (Eigen::Index n = 0; n < data.rows(); ++n) {
    const Eigen::VectorXd z = data.z.row(n).transpose();
    const Eigen::VectorXd mu = eta.row(n).transpose();
    ll[n] = dirichlet_cov_logpdf(z, mu, hyper.sigma2, hyper.gamma);
  }
  return ll;
}

Eigen::MatrixXd loglik_matrix(const FitResult& fit, const PosteriorSamples& samples) {
  Eigen::MatrixXd ll(samples.size(), fit.data.rows());
  for (Eigen::Index s = 0; s < samples.size(); ++s) {
    ll.row(s) = collapsed_loglik(fit.data, fit.spec, fit.layout, fit.points[samples.point[s]].hyper,
                                 samples.latent.col(s))
                    .transpose();
  }
  return ll;
}

Criterion dic_from_loglik(const Eigen::MatrixXd& loglik, const Eigen::VectorXd& plugin) {
  if (loglik.rows() < 1 || loglik.cols() != plugin.size()) throw DimensionError("dic: log-likelihood shapes differ");
  Criterion c;
  const double dbar = -2.0 * loglik.rowwise().sum().mean();
  const double dhat = -2.0 * plugin.sum();
  c.p_eff = dbar - dhat;
  c.value = dbar + c.p_eff;
  if (loglik.rows() < 100) c.warnings.push_back("DIC from fewer than 100 posterior draws is unreliable");
  return c;
}

Criterion waic_from_loglik(const Eigen::MatrixXd& loglik) {
  const Eigen::Index s = loglik.rows();
  if (s < 1) throw DimensionError("waic: no draws");
  Criterion c;
  double lppd = 0.0, p = 0.0;
  for (Eigen::Index n = 0; n < loglik.cols(); ++n) {
    const Eigen::VectorXd col = loglik.col(n);
    lppd += log_sum_exp(col) - std::log(static_cast<double>(s));
    if (s > 1) p += (col.array() - col.mean()).square().sum() / static_cast<double>(s - 1);
  }
  c.p_eff = p;
  c.value = -2.0 * (lppd - p);
  if (s < 100) c.warnings.push_back("WAIC from fewer than 100 posterior draws is unreliable");
  return c;
}

Eigen::VectorXd plugin_loglik(const FitResult& fit) {
  const int k = fit.data.coordinates();
  ModelHyper h;
  h.sigma2 = Eigen::VectorXd::Zero(k);
  h.alpha = Eigen::VectorXd::Zero(k);
  h.gamma = 0.0;
  for (const auto& p : fit.points) {
    h.sigma2 += p.weight * p.hyper.sigma2;
    h.alpha += p.weight * p.hyper.alpha;
    h.gamma += p.weight * p.hyper.gamma;
  }
  return collapsed_loglik(fit.data, fit.spec, fit.layout, h, latent_means(fit));
}

Criterion dic(const FitResult& fit, int samples, std::uint64_t seed) {
  const PosteriorSamples draws = posterior_samples(fit, samples, seed);
  return dic_from_loglik(loglik_matrix(fit, draws), plugin_loglik(fit));
}

Criterion waic(const FitResult& fit, int samples, std::uint64_t seed) {
  const PosteriorSamples draws = posterior_samples(fit, samples, seed);
  return waic_from_loglik(loglik_matrix(fit, draws));
}

double lcpo_from(const Eigen::MatrixXd& cpo) {
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < cpo.size(); ++i) {
    const double v = cpo.data()[i];
    if (std::isfinite(v) && v > 0.0) {
      sum += std::log(v);
      ++count;
    }
  }
  return count > 0 ? -sum / count : NAN;
}

CpoResult cpo_exact(const FitResult& full, int threads) {
  const ModelData& data = full.data;
  const Eigen::Index n = data.rows();
  const int k = data.coordinates();
  if (n < 2) throw InsufficientDataError("cpo: need at least 2 compositions");
  FitConfig cfg = full.config;
  if (full.space->free_dim() > 0) cfg.start = full.grid.mode;
  cfg.hyper_samples = 1;
  if (threads > 1) cfg.grid.threads = 1;

  struct Row {
    Eigen::VectorXd cpo;
    double joint = NAN;
    std::string error;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    Row r;
    r.cpo = Eigen::VectorXd::Constant(k, NAN);
    std::vector<int> keep;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != static_cast<Eigen::Index>(i)) keep.push_back(static_cast<int>(j));
    }
    try {
      const FitResult f = fit(data.subset(keep), full.spec, cfg);
      NewRows held;
      held.design = data.design.row(static_cast<Eigen::Index>(i));
      if (data.coords) held.coords = Eigen::MatrixXd(data.coords->row(static_cast<Eigen::Index>(i)));
      const auto pred = predictive_distribution(f, held);
      const Eigen::VectorXd z = data.z.row(static_cast<Eigen::Index>(i)).transpose();
      for (int d = 0; d < k; ++d) r.cpo[d] = pred[0].marginal(d).pdf(z[d]);
      r.joint = pred[0].joint_log_density(z);
    } catch (const Error& e) {
      r.error = e.what();
    }
    return r;
  });
  CpoResult out;
  out.exact = true;
  out.cpo.resize(n, k);
  out.joint_log_cpo.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    out.cpo.row(i) = r.cpo.transpose();
    out.joint_log_cpo[i] = r.joint;
    if (!r.error.empty()) {
      out.failed.push_back(static_cast<int>(i));
      out.warnings.push_back("refit without composition " + std::to_string(i + 1) + " failed: " + r.error);
    }
  }
  if (!out.failed.empty()) {
    out.warnings.push_back(std::to_string(out.failed.size()) + " composition(s) excluded from LCPO");
  }
  out.lcpo = lcpo_from(out.cpo);
  return out;
}

CpoResult cpo_importance(const FitResult& fit, int samples, std::uint64_t seed, double cv_threshold) {
  const PosteriorSamples draws = posterior_samples(fit, samples, seed);
  const ModelData& data = fit.data;
  const Eigen::Index n = data.rows();
  const int k = data.coordinates();
  const Eigen::Index s_count = draws.size();
  Eigen::MatrixXd joint(s_count, n);
  std::vector<Eigen::MatrixXd> marg(static_cast<std::size_t>(k), Eigen::MatrixXd(s_count, n));
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const ModelHyper& h = fit.points[draws.point[s]].hyper;
    const Eigen::MatrixXd eta = predictor_without_shared(data, fit.spec, fit.layout, h.alpha, draws.latent.col(s));
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd z = data.z.row(i).transpose();
      const Eigen::VectorXd mu = eta.row(i).transpose();
      joint(s, i) = dirichlet_cov_logpdf(z, mu, h.sigma2, h.gamma);
      for (int d = 0; d < k; ++d) marg[d](s, i) = normal_logpdf(z[d], mu[d], h.sigma2[d] + h.gamma);
    }
  }
  CpoResult out;
  out.exact = false;
  out.cpo.resize(n, k);
  out.joint_log_cpo.resize(n);
  out.weight_cv.resize(n);
  const double log_s = std::log(static_cast<double>(s_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd lw = -joint.col(i);
    const double norm = log_sum_exp(lw);
    out.joint_log_cpo[i] = -(norm - log_s);
    for (int d = 0; d < k; ++d) {
      const Eigen::VectorXd t = lw + marg[d].col(i);
      out.cpo(i, d) = std::exp(log_sum_exp(t) - norm);
    }
    const Eigen::ArrayXd w = (lw.array() - lw.maxCoeff()).exp();
    const double mean = w.mean();
    const double sd = s_count > 1 ? std::sqrt((w - mean).square().sum() / static_cast<double>(s_count - 1)) : 0.0;
    out.weight_cv[i] = sd / mean;
    if (out.weight_cv[i] > cv_threshold) out.unstable.push_back(static_cast<int>(i));
  }
  if (!out.unstable.empty()) {
    std::ostringstream msg;
    msg << out.unstable.size() << " composition(s) have importance-weight CV above " << cv_threshold
        << "; their CPO values are unstable";
    out.warnings.push_back(msg.str());
  }
  out.lcpo = lcpo_from(out.cpo);
  return out;
}

CpoResult cpo_coda(const FitResult& fit, const CpoConfig& cfg) {
  const bool exact =
      cfg.mode == CpoMode::Exact || (cfg.mode == CpoMode::Auto && fit.data.rows() <= cfg.exact_max_rows);
  if (exact) return cpo_exact(fit, cfg.threads);
  return cpo_importance(fit, cfg.samples, cfg.seed, cfg.cv_threshold);
}

CpoResult cpo_coda(const ModelData& data, const ModelSpec& spec, const FitConfig& fit_cfg, const CpoConfig& cfg) {
  return cpo_coda(fit(data, spec, fit_cfg), cfg);
}

MetricsReport compute_metrics(const FitResult& fit, const MetricsConfig& cfg) {
  if (cfg.samples < 1) throw InputError("metrics: samples must be positive");
  MetricsReport out;
  const PosteriorSamples draws = posterior_samples(fit, cfg.samples, cfg.seed);
  const Eigen::MatrixXd ll = loglik_matrix(fit, draws);
  const Criterion d = dic_from_loglik(ll, plugin_loglik(fit));
  const Criterion w = waic_from_loglik(ll);
  out.dic = d.value;
  out.p_eff_dic = d.p_eff;
  out.waic = w.value;
  out.p_eff_waic = w.p_eff;
  out.warnings = d.warnings;
  if (cfg.compute_cpo) {
    out.cpo_detail = cpo_coda(fit, cfg.cpo);
    out.cpo = out.cpo_detail.cpo;
    out.lcpo = out.cpo_detail.lcpo;
    out.warnings.insert(out.warnings.end(), out.cpo_detail.warnings.begin(), out.cpo_detail.warnings.end());
  }
  return out;
}

}  // namespace lndm

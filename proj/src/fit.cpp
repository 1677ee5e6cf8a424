#include "lndm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "lndm/coda.hpp"
#include "lndm/error.hpp"
#include "lndm/parallel.hpp"

namespace lndm {

namespace {

// Type 7 (linear interpolation) quantile of sorted values.
double sorted_quantile(const std::vector<double>& v, double p) {
  if (v.empty()) return NAN;
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Summary {
  double mean, sd, q025, q50, q975;
};

Summary summarize(std::vector<double> v) {
  Summary s{};
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  std::sort(v.begin(), v.end());
  s.mean = m;
  s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.q025 = sorted_quantile(v, 0.025);
  s.q50 = sorted_quantile(v, 0.5);
  s.q975 = sorted_quantile(v, 0.975);
  return s;
}

int reference_of(const ModelData& data) { return data.reference > 0 ? data.reference : data.coordinates() + 1; }

// Rows of the link matrix for one new unit (u excluded) plus the kriging
// variance contribution of the field.
struct NewUnit {
  Eigen::MatrixXd a;      // K x latent
  Eigen::MatrixXd extra;  // K x K
};

NewUnit new_unit(const FitResult& fit, const ModelHyper& hyper, const Eigen::RowVectorXd& design,
                 const MaternField::Kriging* krig, Eigen::Index row) {
  const int k = fit.data.coordinates();
  NewUnit u;
  u.a = Eigen::MatrixXd::Zero(k, fit.layout.size);
  u.extra = Eigen::MatrixXd::Zero(k, k);
  for (int d = 0; d < k; ++d) {
    for (Eigen::Index m = 0; m < design.size(); ++m) u.a(d, beta_index(fit.spec, k, m, d)) += design[m];
  }
  const SpatialKind kind = spatial_kind(fit.spec.structure);
  if (kind == SpatialKind::None) return u;
  const Eigen::Index n = fit.data.rows();
  const double s2 = krig->variance[row];
  if (kind == SpatialKind::Replicated) {
    for (int d = 0; d < k; ++d) {
      const auto& b = fit.layout.at("omega[" + std::to_string(d + 1) + "]");
      u.a.block(d, b.offset, 1, n) = krig->weights.row(row);
      u.extra(d, d) = s2;
    }
  } else {
    const auto& b = fit.layout.at("omega");
    for (int d = 0; d < k; ++d) {
      u.a.block(d, b.offset, 1, n) = hyper.alpha[d] * krig->weights.row(row);
      for (int e = 0; e < k; ++e) u.extra(d, e) = hyper.alpha[d] * hyper.alpha[e] * s2;
    }
  }
  return u;
}

void check_new_rows(const FitResult& fit, const NewRows& rows) {
  if (rows.design.cols() != fit.data.design.cols()) {
    throw DimensionError("new rows have " + std::to_string(rows.design.cols()) + " design columns, the fit has " +
                         std::to_string(fit.data.design.cols()) + " (missing covariate columns?)");
  }
  if (spatial_kind(fit.spec.structure) != SpatialKind::None) {
    if (!rows.coords) throw InputError("structure " + to_string(fit.spec.structure) + " needs coordinates to predict");
    if (rows.coords->rows() != rows.design.rows() || rows.coords->cols() != 2) {
      throw DimensionError("new coordinates must be one (x, y) pair per row");
    }
  }
}

}  // namespace

StackedSystem FitResult::system_at(std::size_t point) const { return build_system(data, spec, points.at(point).hyper); }

double default_range0(const ModelData& data) {
  if (!data.coords) return 1.0;
  const Eigen::VectorXd lo = data.coords->colwise().minCoeff();
  const Eigen::VectorXd hi = data.coords->colwise().maxCoeff();
  const double diag = (hi - lo).norm();
  return diag > 0.0 ? 0.1 * diag : 1.0;
}

ModelHyper initial_hyper(const ModelData& data, const ModelSpec& spec) {
  const int k = data.coordinates();
  const Eigen::Index n = data.rows();
  const Eigen::MatrixXd coef = data.design.colPivHouseholderQr().solve(data.z);
  const Eigen::MatrixXd e = data.z - data.design * coef;
  const double dof = std::max<double>(1.0, static_cast<double>(n - data.design.cols()));
  const Eigen::MatrixXd s = e.transpose() * e / dof;
  const double v = std::max(s.diagonal().mean(), 1e-6);
  double off = 0.3 * v;
  if (k > 1) off = (s.sum() - s.trace()) / (static_cast<double>(k) * (k - 1));
  ModelHyper h;
  h.gamma = spec.shared_effect ? std::clamp(off, 0.05 * v, 0.8 * std::max(s.diagonal().minCoeff(), 1e-6)) : 0.0;
  const SpatialKind kind = spatial_kind(spec.structure);
  const double field = kind == SpatialKind::None ? 0.0 : 0.3 * v;
  h.sigma2.resize(k);
  for (int d = 0; d < k; ++d) h.sigma2[d] = std::max(s(d, d) - h.gamma - field, 0.05 * std::max(s(d, d), 1e-6));
  h.alpha = Eigen::VectorXd::Ones(k);
  if (kind != SpatialKind::None) h.spatial = SpatialHyper{std::sqrt(field), 2.0 * default_range0(data), spec.smoothness};
  return h;
}

double log_posterior(const ModelData& data, const ModelSpec& spec, const HyperSpace& space,
                     const Eigen::VectorXd& theta) {
  if (!theta.allFinite() || (theta.size() > 0 && theta.cwiseAbs().maxCoeff() > 40.0)) return -INFINITY;
  try {
    const StackedSystem sys = build_system(data, spec, space.to_model(theta));
    return log_marginal_likelihood(sys) + space.log_prior(theta);
  } catch (const NumericalError&) {
    return -INFINITY;
  } catch (const DomainError&) {
    return -INFINITY;
  }
}

FitResult fit(const ModelData& data, const ModelSpec& spec_in, const FitConfig& cfg) {
  spec_in.validate();
  data.validate();
  check_identifiability(data);
  if (spatial_kind(spec_in.structure) != SpatialKind::None && !data.coords) {
    throw InputError("structure " + to_string(spec_in.structure) + " needs coordinates");
  }
  if (cfg.hyper_samples < 1) throw InputError("hyper_samples must be positive");
  FitResult out;
  out.spec = spec_in;
  out.range0 = spec_in.priors.range.range0 > 0.0 ? spec_in.priors.range.range0 : default_range0(data);
  out.spec.priors.range.range0 = out.range0;
  out.data = data;
  out.config = cfg;
  const ModelSpec& spec = out.spec;
  const int k = data.coordinates();
  auto space = std::make_shared<HyperSpace>(spec, k, out.range0);
  out.space = space;
  out.layout = make_layout(spec, data.design_names, data.rows(), k);

  Eigen::VectorXd start;
  if (cfg.start) {
    if (cfg.start->size() != space->free_dim()) throw DimensionError("warm start has the wrong length");
    start = *cfg.start;
  } else {
    start = space->to_internal(initial_hyper(data, spec));
  }
  const LogDensity lp = [&](const Eigen::VectorXd& theta) { return log_posterior(data, spec, *space, theta); };
  out.grid = explore_hyperparameters(lp, start, cfg.grid);
  out.warnings = out.grid.warnings;

  const auto& grid = out.grid;
  bool jittered = false;
  out.points = parallel_map(grid.size(), cfg.grid.threads, [&](std::size_t t) {
    GridPoint gp;
    gp.theta = grid.points[t];
    gp.hyper = space->to_model(gp.theta);
    gp.log_post = grid.log_post[t];
    gp.delta = grid.delta[t];
    gp.weight = grid.weights[t];
    const StackedSystem sys = build_system(data, spec, gp.hyper);
    if (t == 0 && sys.field_jittered) jittered = true;
    const GaussianPosterior post(sys);
    gp.mean = post.mean();
    gp.variance = post.marginal_variances();
    return gp;
  });
  if (jittered) out.warnings.push_back("Matérn covariance needed diagonal jitter at the mode");

  const Eigen::Index dim = space->free_dim();
  const double top = grid.log_post.maxCoeff();
  out.log_marginal_likelihood = top + std::log(((grid.log_post.array() - top).exp() * grid.delta.array()).sum());
  if (dim > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(grid.mode_hessian);
    out.log_marginal_likelihood -= 0.5 * es.eigenvalues().array().log().sum();
  }

  // hyperparameter marginals from the split-normal fit around the mode
  out.hyper_draws.resize(cfg.hyper_samples, dim);
  if (dim > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd z(dim);
    for (int s = 0; s < cfg.hyper_samples; ++s) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double sp = grid.scale_plus[i], sm = grid.scale_minus[i];
        const double mag = std::abs(norm(rng));
        z[i] = unif(rng) < sp / (sp + sm) ? mag * sp : -mag * sm;
      }
      const Eigen::VectorXd theta = grid.mode + grid.axes * z;
      for (Eigen::Index i = 0; i < dim; ++i) {
        out.hyper_draws(s, i) = HyperSpace::to_user(space->free_param(static_cast<int>(i)), theta[i]);
      }
    }
  }
  const ModelHyper mode_hyper = space->to_model(grid.mode);
  int free = 0;
  for (const auto& p : space->params()) {
    HyperSummary h;
    h.name = p.name;
    h.user_name = p.user_name;
    h.fixed = p.fixed;
    h.mode = HyperSpace::user_value(p, mode_hyper);
    if (p.fixed) {
      h.mean = h.q025 = h.q50 = h.q975 = h.mode;
      h.sd = 0.0;
    } else {
      const Eigen::VectorXd col = out.hyper_draws.col(free++);
      const Summary s = summarize(std::vector<double>(col.data(), col.data() + col.size()));
      h.mean = s.mean;
      h.sd = s.sd;
      h.q025 = s.q025;
      h.q50 = s.q50;
      h.q975 = s.q975;
    }
    out.hyper.push_back(h);
  }
  return out;
}

GaussianMixture latent_marginal(const FitResult& fit, Eigen::Index index) {
  if (index < 0 || index >= fit.latent_size()) {
    throw IndexError("latent index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(fit.latent_size()) + ")");
  }
  const auto t = static_cast<Eigen::Index>(fit.points.size());
  Eigen::VectorXd w(t), m(t), v(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    w[i] = fit.points[i].weight;
    m[i] = fit.points[i].mean[index];
    v[i] = fit.points[i].variance[index];
  }
  return GaussianMixture(w, m, v);
}

GaussianMixture latent_marginal(const FitResult& fit, const std::string& name) {
  const auto it = std::find(fit.layout.names.begin(), fit.layout.names.end(), name);
  if (it == fit.layout.names.end()) throw IndexError("no latent entry named '" + name + "'");
  return latent_marginal(fit, it - fit.layout.names.begin());
}

Eigen::VectorXd latent_means(const FitResult& fit) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(fit.latent_size());
  for (const auto& p : fit.points) m += p.weight * p.mean;
  return m;
}

PosteriorSamples posterior_samples(const FitResult& fit, int n, std::uint64_t seed) {
  if (n <= 0) throw DomainError("posterior_samples: number of draws must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> w(fit.points.size());
  for (std::size_t t = 0; t < w.size(); ++t) w[t] = fit.points[t].weight;
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::normal_distribution<double> norm(0.0, 1.0);
  PosteriorSamples out;
  out.point.resize(n);
  const Eigen::Index p = fit.latent_size();
  Eigen::MatrixXd z(p, n);
  for (int s = 0; s < n; ++s) {
    out.point[s] = pick(rng);
    for (Eigen::Index j = 0; j < p; ++j) z(j, s) = norm(rng);
  }
  std::map<int, std::vector<int>> groups;
  for (int s = 0; s < n; ++s) groups[out.point[s]].push_back(s);
  std::vector<std::pair<int, std::vector<int>>> work(groups.begin(), groups.end());
  out.latent.resize(p, n);
  const auto draws = parallel_map(work.size(), fit.config.grid.threads, [&](std::size_t g) {
    const auto& cols = work[g].second;
    Eigen::MatrixXd zg(p, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) zg.col(static_cast<Eigen::Index>(c)) = z.col(cols[c]);
    const GaussianPosterior post(fit.system_at(static_cast<std::size_t>(work[g].first)));
    return post.sample_from_normals(zg);
  });
  for (std::size_t g = 0; g < work.size(); ++g) {
    const auto& cols = work[g].second;
    for (std::size_t c = 0; c < cols.size(); ++c) out.latent.col(cols[c]) = draws[g].col(static_cast<Eigen::Index>(c));
  }
  return out;
}

GaussianMixture PredictiveDistribution::marginal(int d) const {
  const auto t = static_cast<Eigen::Index>(components.size());
  Eigen::VectorXd w(t), m(t), v(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    w[i] = components[i].weight;
    m[i] = components[i].mean[d];
    v[i] = components[i].cov(d, d);
  }
  return GaussianMixture(w, m, v);
}

double PredictiveDistribution::joint_log_density(const Eigen::VectorXd& z) const {
  Eigen::VectorXd terms(static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    const Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    const Eigen::VectorXd r = llt.matrixL().solve(z - c.mean);
    terms[static_cast<Eigen::Index>(i)] =
        std::log(c.weight) - 0.5 * (static_cast<double>(z.size()) * 1.8378770664093454836 +
                                    2.0 * llt.matrixLLT().diagonal().array().log().sum() + r.squaredNorm());
  }
  return log_sum_exp(terms);
}

std::vector<PredictiveDistribution> predictive_distribution(const FitResult& fit, const NewRows& rows) {
  check_new_rows(fit, rows);
  const Eigen::Index n_new = rows.design.rows();
  const int k = fit.data.coordinates();
  std::vector<PredictiveDistribution> out(static_cast<std::size_t>(n_new));
  const auto per_point = parallel_map(fit.points.size(), fit.config.grid.threads, [&](std::size_t t) {
    const GridPoint& gp = fit.points[t];
    const StackedSystem sys = fit.system_at(t);
    const GaussianPosterior post(sys);
    std::optional<MaternField::Kriging> krig;
    if (sys.field) krig = sys.field->krige(*rows.coords);
    std::vector<PredictiveComponent> comps(static_cast<std::size_t>(n_new));
    for (Eigen::Index i = 0; i < n_new; ++i) {
      const NewUnit u = new_unit(fit, gp.hyper, rows.design.row(i), krig ? &*krig : nullptr, i);
      auto& c = comps[static_cast<std::size_t>(i)];
      c.weight = gp.weight;
      c.mean = u.a * post.mean();
      c.linear_cov = post.combination_covariance(u.a) + u.extra;
      c.cov = c.linear_cov;
      c.cov.diagonal() += gp.hyper.sigma2;
      c.cov.array() += gp.hyper.gamma;
    }
    return comps;
  });
  for (std::size_t t = 0; t < per_point.size(); ++t) {
    for (Eigen::Index i = 0; i < n_new; ++i) out[static_cast<std::size_t>(i)].components.push_back(per_point[t][i]);
  }
  (void)k;
  return out;
}

Prediction predict(const FitResult& fit, const NewRows& rows, int draws, std::uint64_t seed) {
  check_new_rows(fit, rows);
  if (draws < 2) throw DomainError("predict: need at least 2 draws");
  const PosteriorSamples samples = posterior_samples(fit, draws, seed);
  const Eigen::Index n_new = rows.design.rows();
  const int k = fit.data.coordinates();
  const int parts = k + 1;
  const int ref = reference_of(fit.data);
  const SpatialKind kind = spatial_kind(fit.spec.structure);

  std::map<int, MaternField::Kriging> krig;
  if (kind != SpatialKind::None) {
    for (int t : samples.point) {
      if (!krig.count(t)) krig.emplace(t, fit.system_at(static_cast<std::size_t>(t)).field->krige(*rows.coords));
    }
  }

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> norm(0.0, 1.0);
  // draws stored per row: eta, alr, simplex
  std::vector<Eigen::MatrixXd> eta(n_new, Eigen::MatrixXd(draws, k)), alr(n_new, Eigen::MatrixXd(draws, k)),
      simp(n_new, Eigen::MatrixXd(draws, parts));
  const Eigen::Index nn = fit.data.rows();
  for (int s = 0; s < draws; ++s) {
    const int t = samples.point[s];
    const ModelHyper& h = fit.points[t].hyper;
    const Eigen::VectorXd x = samples.latent.col(s);
    for (Eigen::Index i = 0; i < n_new; ++i) {
      Eigen::VectorXd e(k);
      for (int d = 0; d < k; ++d) {
        double v = 0.0;
        for (Eigen::Index m = 0; m < rows.design.cols(); ++m) v += rows.design(i, m) * x[beta_index(fit.spec, k, m, d)];
        e[d] = v;
      }
      if (kind == SpatialKind::Shared || kind == SpatialKind::Proportional) {
        const auto& kr = krig.at(t);
        const auto& b = fit.layout.at("omega");
        const double w = kr.weights.row(i).dot(x.segment(b.offset, nn)) + std::sqrt(kr.variance[i]) * norm(rng);
        for (int d = 0; d < k; ++d) e[d] += h.alpha[d] * w;
      } else if (kind == SpatialKind::Replicated) {
        const auto& kr = krig.at(t);
        for (int d = 0; d < k; ++d) {
          const auto& b = fit.layout.at("omega[" + std::to_string(d + 1) + "]");
          e[d] += kr.weights.row(i).dot(x.segment(b.offset, nn)) + std::sqrt(kr.variance[i]) * norm(rng);
        }
      }
      eta[i].row(s) = e.transpose();
      const double u = h.gamma > 0.0 ? std::sqrt(h.gamma) * norm(rng) : 0.0;
      Eigen::VectorXd y(k);
      for (int d = 0; d < k; ++d) y[d] = e[d] + u + std::sqrt(h.sigma2[d]) * norm(rng);
      alr[i].row(s) = y.transpose();
      simp[i].row(s) = alr_inv_values(y, ref).transpose();
    }
  }

  Prediction out;
  out.draws = draws;
  auto fill = [&](const std::vector<Eigen::MatrixXd>& src, int cols, Eigen::MatrixXd* mean, Eigen::MatrixXd* sd,
                  Eigen::MatrixXd* lo, Eigen::MatrixXd* hi) {
    mean->resize(n_new, cols);
    sd->resize(n_new, cols);
    if (lo) lo->resize(n_new, cols);
    if (hi) hi->resize(n_new, cols);
    for (Eigen::Index i = 0; i < n_new; ++i) {
      for (int c = 0; c < cols; ++c) {
        const Eigen::VectorXd col = src[i].col(c);
        const Summary s = summarize(std::vector<double>(col.data(), col.data() + col.size()));
        (*mean)(i, c) = s.mean;
        (*sd)(i, c) = s.sd;
        if (lo) (*lo)(i, c) = s.q025;
        if (hi) (*hi)(i, c) = s.q975;
      }
    }
  };
  fill(eta, k, &out.eta_mean, &out.eta_sd, nullptr, nullptr);
  fill(alr, k, &out.alr_mean, &out.alr_sd, &out.alr_q025, &out.alr_q975);
  fill(simp, parts, &out.simplex_mean, &out.simplex_sd, &out.simplex_q025, &out.simplex_q975);
  // per-draw rows are closed, so are their means; renormalize away summation error
  for (Eigen::Index i = 0; i < n_new; ++i) out.simplex_mean.row(i) /= out.simplex_mean.row(i).sum();
  return out;
}

}  // namespace lndm

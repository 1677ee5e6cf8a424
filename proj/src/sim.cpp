#include "lndm/sim.hpp"

#include <cmath>
#include <random>

#include "lndm/coda.hpp"
#include "lndm/distributions.hpp"
#include "lndm/error.hpp"
#include "lndm/spatial.hpp"

namespace lndm {

namespace {

Eigen::MatrixXd field_factor(const Eigen::MatrixXd& coords, const SpatialHyper& h) {
  Eigen::MatrixXd c = matern_cov(coords, h);
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    c.diagonal().array() += 1e-8 * h.sigma_omega * h.sigma_omega;
    llt.compute(c);
    if (llt.info() != Eigen::Success) throw ConditioningError("simulate: Matérn covariance not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

ModelData SimulatedData::model_data() const {
  ModelData d;
  d.z = alr;
  d.design.resize(alr.rows(), covariates.cols() + 1);
  d.design.col(0).setOnes();
  d.design.rightCols(covariates.cols()) = covariates;
  d.design_names.push_back("intercept");
  for (const auto& n : covariate_names) d.design_names.push_back(n);
  d.coords = coords;
  d.reference = static_cast<int>(compositions.cols());
  return d;
}

SimulatedData simulate_lndm(const SimulationSpec& spec) {
  const ModelHyper& h = spec.hyper;
  const Eigen::Index k = h.sigma2.size();
  const Eigen::Index n = spec.rows;
  if (k < 1) throw DimensionError("simulate: sigma2 must have one entry per alr coordinate");
  if (n < 1) throw DomainError("simulate: number of rows must be positive");
  if (!(h.sigma2.array() > 0.0).all() || !(h.gamma >= 0.0)) {
    throw DomainError("simulate: sigma2 must be positive and gamma nonnegative");
  }
  Eigen::MatrixXd beta = spec.beta;
  if (beta.rows() == 1 && k > 1) {
    if (!shares_fixed_effects(spec.structure)) {
      throw DimensionError("simulate: per-coordinate structures need one beta row per alr coordinate");
    }
    beta = beta.replicate(k, 1).eval();
  }
  if (beta.rows() != k || beta.cols() < 1) throw DimensionError("simulate: beta must be K x P with P >= 1");
  if (shares_fixed_effects(spec.structure)) {
    for (Eigen::Index d = 1; d < k; ++d) {
      if ((beta.row(d) - beta.row(0)).cwiseAbs().maxCoeff() > 0.0) {
        throw DomainError("simulate: structure " + to_string(spec.structure) + " shares beta across coordinates");
      }
    }
  }
  const SpatialKind kind = spatial_kind(spec.structure);
  if (kind != SpatialKind::None) {
    if (!h.spatial) throw DomainError("simulate: spatial structures need sigma_omega and range");
    h.spatial->validate();
  }
  if (kind == SpatialKind::Proportional && (h.alpha.size() != k || h.alpha[0] != 1.0)) {
    throw DomainError("simulate: proportional structures need alpha of length K with alpha[1] = 1");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::normal_distribution<double> norm(0.0, 1.0);

  SimulatedData out;
  const Eigen::Index p = beta.cols();
  out.covariates.resize(n, p - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index m = 0; m < p - 1; ++m) out.covariates(i, m) = unif(rng);
  }
  for (Eigen::Index m = 1; m < p; ++m) out.covariate_names.push_back("x" + std::to_string(m));
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.rightCols(p - 1) = out.covariates;
  out.eta = design * beta.transpose();

  if (kind != SpatialKind::None) {
    if (spec.coords) {
      if (spec.coords->rows() != n || spec.coords->cols() != 2) {
        throw DimensionError("simulate: coordinates must be N x 2");
      }
      out.coords = *spec.coords;
    } else {
      std::uniform_real_distribution<double> square(0.0, 1.0);
      Eigen::MatrixXd c(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        c(i, 0) = square(rng);
        c(i, 1) = square(rng);
      }
      out.coords = c;
    }
    const Eigen::MatrixXd l = field_factor(*out.coords, *h.spatial);
    const Eigen::Index fields = kind == SpatialKind::Replicated ? k : 1;
    out.field.resize(n, fields);
    for (Eigen::Index f = 0; f < fields; ++f) {
      Eigen::VectorXd z(n);
      for (Eigen::Index i = 0; i < n; ++i) z[i] = norm(rng);
      out.field.col(f) = l * z;
    }
    for (Eigen::Index d = 0; d < k; ++d) {
      switch (kind) {
        case SpatialKind::Shared:
          out.eta.col(d) += out.field.col(0);
          break;
        case SpatialKind::Proportional:
          out.eta.col(d) += h.alpha[d] * out.field.col(0);
          break;
        case SpatialKind::Replicated:
          out.eta.col(d) += out.field.col(d);
          break;
        case SpatialKind::None:
          break;
      }
    }
  } else {
    out.field.resize(n, 0);
  }

  out.alr.resize(n, k);
  if (spec.augmented) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = std::sqrt(h.gamma) * norm(rng);
      for (Eigen::Index d = 0; d < k; ++d) out.alr(i, d) = out.eta(i, d) + u + std::sqrt(h.sigma2[d]) * norm(rng);
    }
  } else {
    const Eigen::MatrixXd l = dirichlet_covariance(h.sigma2, h.gamma).llt().matrixL();
    Eigen::VectorXd z(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index d = 0; d < k; ++d) z[d] = norm(rng);
      out.alr.row(i) = out.eta.row(i) + (l * z).transpose();
    }
  }
  const int ref = static_cast<int>(k + 1);
  out.compositions.resize(n, k + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.compositions.row(i) = alr_inv_values(out.alr.row(i).transpose(), ref).transpose();
  }
  return out;
}

}  // namespace lndm

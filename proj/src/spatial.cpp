#include "lndm/spatial.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm {

namespace {

double correlation_at(double x, double nu) {
  // x = kappa * r
  if (x < 1e-12) return 1.0;
  if (x > 700.0) return 0.0;
  return std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(x)) *
         std::cyl_bessel_k(nu, x);
}

double solve_range_constant(double nu) {
  // correlation_at is decreasing in x; bisection to machine precision
  double lo = 1e-6;
  double hi = 1.0;
  while (correlation_at(hi, nu) > 0.1) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (correlation_at(mid, nu) > 0.1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void SpatialHyper::validate() const {
  if (!(sigma_omega > 0.0) || !std::isfinite(sigma_omega)) {
    throw DomainError("spatial: sigma_omega must be positive");
  }
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw DomainError("spatial: range must be positive");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("spatial: smoothness must be positive");
  }
}

double matern_range_constant(double nu) {
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(nu);
  if (it != cache.end()) return it->second;
  const double c = solve_range_constant(nu);
  cache.emplace(nu, c);
  return c;
}

double matern_correlation(double r, double range, double nu) {
  const double kappa = matern_range_constant(nu) / range;
  return correlation_at(kappa * r, nu);
}

Eigen::MatrixXd matern_cross_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SpatialHyper& h) {
  h.validate();
  if (a.cols() != 2 || b.cols() != 2) {
    throw DimensionError("matern: coordinates must have 2 columns");
  }
  const double kappa = matern_range_constant(h.nu) / h.range;
  const double var = h.sigma_omega * h.sigma_omega;
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double r = (a.row(i) - b.row(j)).norm();
      c(i, j) = var * correlation_at(kappa * r, h.nu);
    }
  }
  return c;
}

Eigen::MatrixXd matern_cov(const Eigen::MatrixXd& coords, const SpatialHyper& h) {
  h.validate();
  if (coords.cols() != 2) {
    throw DimensionError("matern_cov: coordinates must have 2 columns");
  }
  const double kappa = matern_range_constant(h.nu) / h.range;
  const double var = h.sigma_omega * h.sigma_omega;
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    c(j, j) = var;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r = (coords.row(i) - coords.row(j)).norm();
      c(i, j) = c(j, i) = var * correlation_at(kappa * r, h.nu);
    }
  }
  return c;
}

int jitter_duplicate_coords(Eigen::MatrixXd& coords, double jitter) {
  int moved = 0;
  for (Eigen::Index i = 1; i < coords.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if ((coords.row(i) - coords.row(j)).norm() == 0.0) {
        coords(i, 0) += jitter * static_cast<double>(i);
        ++moved;
        break;
      }
    }
  }
  return moved;
}

MaternField::MaternField(const Eigen::MatrixXd& coords, const SpatialHyper& h)
    : hyper_(h), coords_(coords), cov_(matern_cov(coords, h)) {
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) {
    cov_.diagonal().array() += 1e-8 * h.sigma_omega * h.sigma_omega;
    llt_.compute(cov_);
    jittered_ = true;
    if (llt_.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "Matérn covariance not positive definite after jitter (sigma_omega=" << h.sigma_omega
          << ", range=" << h.range << ")";
      throw ConditioningError(msg.str());
    }
  }
  const Eigen::Index n = cov_.rows();
  log_det_cov_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  precision_ = llt_.solve(Eigen::MatrixXd::Identity(n, n));
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
}

MaternField::Kriging MaternField::krige(const Eigen::MatrixXd& new_coords) const {
  const Eigen::MatrixXd cross = matern_cross_cov(new_coords, coords_, hyper_);
  Kriging k;
  k.weights = llt_.solve(cross.transpose()).transpose();
  const double var = hyper_.sigma_omega * hyper_.sigma_omega;
  k.variance = (var - (k.weights.array() * cross.array()).rowwise().sum()).matrix();
  k.variance = k.variance.cwiseMax(0.0);
  return k;
}

SpatialPrecision spatial_prior_precision(SpatialKind kind, int coordinates, const Eigen::MatrixXd& coords,
                                         const SpatialHyper& h) {
  if (kind == SpatialKind::None) {
    throw DomainError("spatial_prior_precision: structure has no spatial effect");
  }
  const MaternField field(coords, h);
  const Eigen::Index n = coords.rows();
  SpatialPrecision out;
  out.blocks = (kind == SpatialKind::Replicated) ? coordinates : 1;
  out.precision = Eigen::MatrixXd::Zero(n * out.blocks, n * out.blocks);
  for (int b = 0; b < out.blocks; ++b) {
    out.precision.block(b * n, b * n, n, n) = field.precision();
  }
  out.log_det_precision = -static_cast<double>(out.blocks) * field.log_det_cov();
  out.jittered = field.jittered();
  return out;
}

}  // namespace lndm

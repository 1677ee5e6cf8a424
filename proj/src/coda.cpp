#include "lndm/coda.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm {

Composition::Composition(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw DimensionError("composition needs at least 2 parts, got " + std::to_string(values_.size()));
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v > 0.0) || !(v <= 1.0) || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "composition part " << i + 1 << " = " << v << " is outside (0, 1)";
      throw DomainError(msg.str());
    }
  }
  if (std::abs(values_.sum() - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg << "composition parts sum to " << values_.sum() << ", expected 1";
    throw DomainError(msg.str());
  }
}

AlrCoords::AlrCoords(Eigen::VectorXd values, int reference)
    : values_(std::move(values)), reference_(reference) {
  if (values_.size() < 1) {
    throw DimensionError("alr coordinates need at least one entry");
  }
  if (reference_ < 1 || reference_ > values_.size() + 1) {
    throw IndexError("reference category " + std::to_string(reference_) + " out of range 1.." +
                     std::to_string(values_.size() + 1));
  }
  if (!values_.allFinite()) {
    throw DomainError("alr coordinates must be finite");
  }
}

Composition closure(const Eigen::VectorXd& v) {
  if (v.size() < 2) {
    throw DimensionError("closure needs at least 2 parts, got " + std::to_string(v.size()));
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "closure: part " << i + 1 << " = " << v[i] << " is not positive";
      throw DomainError(msg.str());
    }
  }
  return Composition(v / v.sum());
}

AlrCoords alr(const Composition& c, int reference) {
  const Eigen::Index parts = c.parts();
  if (reference < 1 || reference > parts) {
    throw IndexError("reference category " + std::to_string(reference) + " out of range 1.." +
                     std::to_string(parts));
  }
  const double log_ref = std::log(c[reference - 1]);
  Eigen::VectorXd z(parts - 1);
  Eigen::Index j = 0;
  for (Eigen::Index d = 0; d < parts; ++d) {
    if (d == reference - 1) continue;
    z[j++] = std::log(c[d]) - log_ref;
  }
  return AlrCoords(std::move(z), reference);
}

Eigen::VectorXd alr_inv_values(const Eigen::VectorXd& z, int reference) {
  const Eigen::Index parts = z.size() + 1;
  // max-subtraction keeps exp() in range; the reference slot has log-weight 0
  const double shift = std::max(0.0, z.maxCoeff());
  Eigen::VectorXd y(parts);
  Eigen::Index j = 0;
  for (Eigen::Index d = 0; d < parts; ++d) {
    y[d] = (d == reference - 1) ? std::exp(-shift) : std::exp(z[j++] - shift);
  }
  return y / y.sum();
}

Composition alr_inv(const AlrCoords& z) {
  Eigen::VectorXd y = alr_inv_values(z.values(), z.reference());
  if ((y.array() <= 0.0).any()) {
    throw DomainError("alr_inv: coordinates too extreme, a part underflows to zero");
  }
  return Composition(std::move(y));
}

int suggest_reference(const Eigen::MatrixXd& compositions) {
  if (compositions.rows() < 2) {
    throw InsufficientDataError("suggest_reference needs at least 2 rows");
  }
  if ((compositions.array() <= 0.0).any()) {
    throw DomainError("suggest_reference: compositions must be strictly positive");
  }
  const Eigen::MatrixXd logs = compositions.array().log().matrix();
  const double n = static_cast<double>(logs.rows());
  int best = 1;
  double best_var = std::numeric_limits<double>::infinity();
  for (Eigen::Index d = 0; d < logs.cols(); ++d) {
    const double mean = logs.col(d).mean();
    const double var = (logs.col(d).array() - mean).square().sum() / (n - 1.0);
    if (var < best_var) {
      best_var = var;
      best = static_cast<int>(d) + 1;
    }
  }
  return best;
}

Eigen::MatrixXd alr_rows(const Eigen::MatrixXd& compositions, int reference) {
  const Eigen::Index parts = compositions.cols();
  if (reference < 1 || reference > parts) {
    throw IndexError("reference category " + std::to_string(reference) + " out of range 1.." +
                     std::to_string(parts));
  }
  Eigen::MatrixXd z(compositions.rows(), parts - 1);
  for (Eigen::Index n = 0; n < compositions.rows(); ++n) {
    const Composition c(compositions.row(n).transpose());
    z.row(n) = alr(c, reference).values().transpose();
  }
  return z;
}

ZeroReplacement replace_zeros(const Eigen::MatrixXd& raw, double eps) {
  ZeroReplacement out{raw, 0};
  for (Eigen::Index n = 0; n < raw.rows(); ++n) {
    const auto zeros = (raw.row(n).array() == 0.0).count();
    if (zeros == 0) continue;
    out.replaced_cells += static_cast<int>(zeros);
    Eigen::RowVectorXd row = raw.row(n).array() + eps;
    out.compositions.row(n) = row / row.sum();
  }
  return out;
}

}  // namespace lndm

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lndm {

/// A point on the simplex: D >= 2 positive parts summing to one.
///
/// Parts are strictly positive. A part may round to exactly 1.0 when the
/// others are below machine epsilon relative to it (e.g. alr_inv of very large
/// coordinates); the sum constraint is checked to 1e-10.
class Composition {
 public:
  static constexpr double kSumTolerance = 1e-10;

  explicit Composition(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index parts() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Eigen::VectorXd values_;
};

/// Additive log-ratio coordinates together with the (1-based) reference
/// category they were computed against.
class AlrCoords {
 public:
  AlrCoords(Eigen::VectorXd values, int reference);

  const Eigen::VectorXd& values() const { return values_; }
  int reference() const { return reference_; }
  /// Number of parts D of the composition these coordinates describe.
  Eigen::Index parts() const { return values_.size() + 1; }

 private:
  Eigen::VectorXd values_;
  int reference_;
};

Composition closure(const Eigen::VectorXd& v);

/// log(y_j / y_ref) for every non-reference j, in original order.
AlrCoords alr(const Composition& c, int reference);

Composition alr_inv(const AlrCoords& z);

/// Unchecked inverse alr on raw values. Underflowed parts come back as 0
/// instead of throwing; used on posterior draws where a Composition is not
/// needed.
Eigen::VectorXd alr_inv_values(const Eigen::VectorXd& z, int reference);

/// Category (1-based) whose log has the smallest sample variance across rows.
int suggest_reference(const Eigen::MatrixXd& compositions);

/// Row-wise alr of an N x D matrix of compositions, giving N x (D-1).
Eigen::MatrixXd alr_rows(const Eigen::MatrixXd& compositions, int reference);

struct ZeroReplacement {
  Eigen::MatrixXd compositions;
  int replaced_cells = 0;
};

/// Multiplicative replacement: add eps to every part of rows holding a zero,
/// then re-close the row.
ZeroReplacement replace_zeros(const Eigen::MatrixXd& raw, double eps = 1e-6);

}  // namespace lndm

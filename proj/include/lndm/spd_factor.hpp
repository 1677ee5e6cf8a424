#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>

namespace lndm {

/// Cholesky factorization of a symmetric positive definite matrix Q.
///
/// Small or dense matrices go to a dense LLT, everything else to a sparse
/// simplicial LLT with AMD ordering. Either way P Q P' = L L' with P a
/// permutation (the identity for the dense backend).
class SpdFactor {
 public:
  /// Throws ConditioningError when Q is not numerically positive definite.
  explicit SpdFactor(const Eigen::SparseMatrix<double>& q);
  ~SpdFactor();
  SpdFactor(SpdFactor&&) noexcept;
  SpdFactor& operator=(SpdFactor&&) noexcept;

  Eigen::Index size() const { return n_; }
  bool dense() const { return dense_; }
  double log_det() const { return log_det_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  /// L^-1 P B. Column norms give b' Q^-1 b.
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& b) const;
  /// P' L^-T Z: maps standard normal columns to N(0, Q^-1) draws.
  Eigen::MatrixXd colour(const Eigen::MatrixXd& z) const;
  /// diag(Q^-1).
  Eigen::VectorXd inverse_diagonal() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Eigen::Index n_ = 0;
  bool dense_ = false;
  double log_det_ = 0.0;
};

}  // namespace lndm

#include "lndm/spd_factor.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

#include "lndm/error.hpp"

namespace lndm {

namespace {

constexpr Eigen::Index kDenseSize = 400;
constexpr double kDenseFill = 0.1;
constexpr Eigen::Index kChunk = 64;

}  // namespace

struct SpdFactor::Impl {
  Eigen::LLT<Eigen::MatrixXd> dense;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> sparse;
};

SpdFactor::SpdFactor(const Eigen::SparseMatrix<double>& q) : impl_(std::make_unique<Impl>()), n_(q.rows()) {
  if (q.rows() != q.cols()) throw DimensionError("SpdFactor: matrix is not square");
  const double fill = n_ > 0 ? static_cast<double>(q.nonZeros()) / (static_cast<double>(n_) * n_) : 1.0;
  dense_ = n_ <= kDenseSize || fill > kDenseFill;
  if (dense_) {
    impl_->dense.compute(Eigen::MatrixXd(q));
    if (impl_->dense.info() != Eigen::Success) {
      throw ConditioningError("Cholesky factorization failed: matrix not positive definite");
    }
    log_det_ = 2.0 * impl_->dense.matrixLLT().diagonal().array().log().sum();
  } else {
    impl_->sparse.compute(q);
    if (impl_->sparse.info() != Eigen::Success) {
      throw ConditioningError("sparse Cholesky factorization failed: matrix not positive definite");
    }
    const Eigen::SparseMatrix<double>& l = impl_->sparse.matrixL();
    double ld = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) ld += std::log(l.coeff(j, j));
    log_det_ = 2.0 * ld;
  }
  if (!std::isfinite(log_det_)) throw ConditioningError("Cholesky factor has a non-finite log determinant");
}

SpdFactor::~SpdFactor() = default;
SpdFactor::SpdFactor(SpdFactor&&) noexcept = default;
SpdFactor& SpdFactor::operator=(SpdFactor&&) noexcept = default;

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const {
  if (dense_) return impl_->dense.solve(b);
  return impl_->sparse.solve(b);
}

Eigen::MatrixXd SpdFactor::solve(const Eigen::MatrixXd& b) const {
  if (dense_) return impl_->dense.solve(b);
  return impl_->sparse.solve(b);
}

Eigen::MatrixXd SpdFactor::half_solve(const Eigen::MatrixXd& b) const {
  if (dense_) return impl_->dense.matrixL().solve(b);
  Eigen::MatrixXd pb = impl_->sparse.permutationP() * b;
  impl_->sparse.matrixL().solveInPlace(pb);
  return pb;
}

Eigen::MatrixXd SpdFactor::colour(const Eigen::MatrixXd& z) const {
  if (dense_) return impl_->dense.matrixU().solve(z);
  Eigen::MatrixXd x = z;
  impl_->sparse.matrixU().solveInPlace(x);
  return impl_->sparse.permutationPinv() * x;
}

Eigen::VectorXd SpdFactor::inverse_diagonal() const {
  Eigen::VectorXd d(n_);
  if (dense_) {
    Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n_, n_);
    impl_->dense.matrixL().solveInPlace(linv);
    d = linv.colwise().squaredNorm().transpose();
    return d;
  }
  const auto& perm = impl_->sparse.permutationP().indices();
  for (Eigen::Index j0 = 0; j0 < n_; j0 += kChunk) {
    const Eigen::Index m = std::min(kChunk, n_ - j0);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n_, m);
    for (Eigen::Index k = 0; k < m; ++k) e(perm[j0 + k], k) = 1.0;
    impl_->sparse.matrixL().solveInPlace(e);
    d.segment(j0, m) = e.colwise().squaredNorm().transpose();
  }
  return d;
}

}  // namespace lndm

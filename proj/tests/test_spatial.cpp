#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lndm/error.hpp"
#include "lndm/spatial.hpp"
#include "support.hpp"

using namespace lndm;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_coords(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Eigen::MatrixXd c(n, 2);
  for (int i = 0; i < n; ++i) c.row(i) << u(rng), u(rng);
  return c;
}

// Bessel K_1 by the integral K_1(x) = int_0^inf exp(-x cosh t) cosh t dt,
// trapezoid on a long grid; independent of std::cyl_bessel_k.
double bessel_k1(double x) {
  const double h = 1e-4;
  double s = 0.5 * std::exp(-x);
  for (int i = 1; i < 200000; ++i) {
    const double t = i * h;
    s += std::exp(-x * std::cosh(t)) * std::cosh(t);
  }
  return s * h;
}

}  // namespace

TEST_CASE("variance at zero distance") {
  std::mt19937_64 rng(1);
  const SpatialHyper h{1.7, 0.4, 1.0};
  const auto c = matern_cov(random_coords(rng, 10), h);
  for (int i = 0; i < 10; ++i) CHECK(c(i, i) == Approx(1.7 * 1.7));
  CHECK(matern_correlation(0.0, 0.4, 1.0) == 1.0);
}

TEST_CASE("correlation at the range is 0.1") {
  for (double range : {0.05, 0.3, 1.0, 12.0}) {
    CHECK(matern_correlation(range, range, 1.0) == Approx(0.1).epsilon(1e-9));
  }
  // nu = 1: rho(r) = kappa r K_1(kappa r)
  const double x = matern_range_constant(1.0);
  CHECK(x * bessel_k1(x) == Approx(0.1).epsilon(1e-6));
  CHECK(std::abs(matern_correlation(1.0, 1.0, 1.0) - 0.1) < 0.02);
}

TEST_CASE("covariance is symmetric positive definite") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const SpatialHyper h{u(rng), u(rng), 1.0};
    const auto c = matern_cov(random_coords(rng, 20), h);
    CHECK((c - c.transpose()).norm() == 0.0);
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("hyperparameter validation") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(matern_cov(c, SpatialHyper{0.0, 1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(matern_cov(c, SpatialHyper{1.0, -1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(matern_cov(Eigen::MatrixXd::Zero(2, 3), SpatialHyper{}), DimensionError);
}

TEST_CASE("translation and rotation invariance") {
  std::mt19937_64 rng(3);
  const auto c = random_coords(rng, 15);
  const SpatialHyper h{1.2, 0.5, 1.0};
  const double a = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Eigen::MatrixXd moved = (c * rot.transpose()).rowwise() + Eigen::RowVector2d(3.0, -8.0);
  CHECK((matern_cov(c, h) - matern_cov(moved, h)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("short range gives a diagonal covariance") {
  std::mt19937_64 rng(5);
  const auto c = random_coords(rng, 12, 10.0);
  const auto cov = matern_cov(c, SpatialHyper{0.8, 1e-3, 1.0});
  const Eigen::MatrixXd off = cov - Eigen::MatrixXd(cov.diagonal().asDiagonal());
  CHECK(off.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("prior precision blocks") {
  std::mt19937_64 rng(2);
  const auto c = random_coords(rng, 8);
  const SpatialHyper h{1.0, 0.6, 1.0};
  const auto cov = matern_cov(c, h);

  const auto rep = spatial_prior_precision(SpatialKind::Replicated, 3, c, h);
  CHECK(rep.blocks == 3);
  CHECK(rep.precision.rows() == 24);
  for (int b = 0; b < 3; ++b) {
    const Eigen::MatrixXd prod = rep.precision.block(8 * b, 8 * b, 8, 8) * cov;
    CHECK((prod - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
    for (int b2 = 0; b2 < 3; ++b2) {
      if (b2 != b) CHECK(rep.precision.block(8 * b, 8 * b2, 8, 8).norm() == 0.0);
    }
  }
  const auto shared = spatial_prior_precision(SpatialKind::Shared, 3, c, h);
  CHECK(shared.precision.rows() == 8);
  CHECK(rep.log_det_precision == Approx(3.0 * shared.log_det_precision));
  CHECK(shared.log_det_precision == Approx(-std::log(cov.determinant())));
  CHECK_THROWS_AS(spatial_prior_precision(SpatialKind::None, 3, c, h), DomainError);
}

TEST_CASE("replicated log prior is the sum of identical block densities") {
  std::mt19937_64 rng(12);
  const auto c = random_coords(rng, 6);
  const SpatialHyper h{0.9, 0.4, 1.0};
  const auto rep = spatial_prior_precision(SpatialKind::Replicated, 3, c, h);
  const Eigen::VectorXd w = test::normals(rng, 18);
  const double joint =
      -0.5 * (18.0 * std::log(2.0 * test::kPi) - rep.log_det_precision + w.dot(rep.precision * w));
  const auto cov = matern_cov(c, h);
  double sum = 0.0;
  for (int b = 0; b < 3; ++b) sum += test::dense_mvn_logpdf(w.segment(6 * b, 6), Eigen::VectorXd::Zero(6), cov);
  CHECK(joint == Approx(sum).epsilon(1e-10));
}

TEST_CASE("duplicate coordinates") {
  Eigen::MatrixXd c(3, 2);
  c << 0.1, 0.2, 0.1, 0.2, 0.5, 0.5;
  CHECK(jitter_duplicate_coords(c) == 1);
  CHECK(c(1, 0) != c(0, 0));
  Eigen::LLT<Eigen::MatrixXd> llt(matern_cov(c, SpatialHyper{1.0, 0.3, 1.0}));
  CHECK(llt.info() == Eigen::Success);

  // exact duplicates without jitter fall back to the diagonal nugget
  Eigen::MatrixXd d(3, 2);
  d << 0.1, 0.2, 0.1, 0.2, 0.5, 0.5;
  const MaternField f(d, SpatialHyper{1.0, 0.3, 1.0});
  CHECK(std::isfinite(f.log_det_cov()));
}

TEST_CASE("kriging reproduces observed locations") {
  std::mt19937_64 rng(4);
  const auto c = random_coords(rng, 10);
  const MaternField f(c, SpatialHyper{1.3, 0.5, 1.0});
  const auto k = f.krige(c.topRows(3));
  CHECK((k.weights.leftCols(3) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(k.variance.cwiseAbs().maxCoeff() < 1e-8);

  Eigen::MatrixXd far(1, 2);
  far << 100.0, 100.0;
  const auto kf = f.krige(far);
  CHECK(kf.variance[0] == Approx(1.69));
}

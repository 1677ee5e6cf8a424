#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lndm/coda.hpp"
#include "lndm/error.hpp"
#include "support.hpp"

using namespace lndm;
using doctest::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("closure normalizes") {
  auto c = closure(vec({1, 1, 2}));
  CHECK(c[0] == Approx(0.25));
  CHECK(c[1] == Approx(0.25));
  CHECK(c[2] == Approx(0.5));

  c = closure(vec({2, 2, 2}));
  for (int i = 0; i < 3; ++i) CHECK(c[i] == Approx(1.0 / 3.0));

  c = closure(vec({0.2, 0.3, 0.5}));
  CHECK(c[0] == Approx(0.2).epsilon(1e-14));
  CHECK(c[2] == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("closure errors and idempotence") {
  CHECK_THROWS_AS(closure(vec({1, 0, 2})), DomainError);
  CHECK_THROWS_AS(closure(vec({1, -1, 2})), DomainError);
  CHECK_THROWS_AS(closure(vec({1})), DimensionError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  Eigen::VectorXd v(5);
  for (int i = 0; i < 5; ++i) v[i] = u(rng);
  const auto once = closure(v);
  const auto twice = closure(once.values());
  CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("composition invariants") {
  CHECK_THROWS_AS(Composition(vec({0.5, 0.6})), DomainError);
  CHECK_THROWS_AS(Composition(vec({1.0})), DimensionError);
  CHECK_THROWS_AS(Composition(vec({0.0, 1.0})), DomainError);
  CHECK_NOTHROW(Composition(vec({0.3, 0.7})));
}

TEST_CASE("alr on known compositions") {
  auto z = alr(closure(vec({1, 1, 1})), 3);
  CHECK(z.values().norm() < 1e-15);
  CHECK(z.reference() == 3);

  z = alr(Composition(vec({0.5, 0.25, 0.25})), 3);
  CHECK(z.values()[0] == Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(z.values()[1]) < 1e-15);

  CHECK_THROWS_AS(alr(closure(vec({1, 1, 1})), 0), IndexError);
  CHECK_THROWS_AS(alr(closure(vec({1, 1, 1})), 4), IndexError);
}

TEST_CASE("alr of the uniform composition is zero for every reference") {
  const auto c = closure(Eigen::VectorXd::Ones(6));
  for (int ref = 1; ref <= 6; ++ref) CHECK(alr(c, ref).values().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("alr_inv on known coordinates") {
  auto c = alr_inv(AlrCoords(vec({0, 0}), 3));
  for (int i = 0; i < 3; ++i) CHECK(c[i] == Approx(1.0 / 3.0).epsilon(1e-14));

  c = alr_inv(AlrCoords(vec({std::log(2.0), 0}), 3));
  CHECK(c[0] == Approx(0.5).epsilon(1e-14));
  CHECK(c[1] == Approx(0.25).epsilon(1e-14));
  CHECK(c[2] == Approx(0.25).epsilon(1e-14));

  CHECK_THROWS_AS(AlrCoords(vec({NAN, 0}), 3), DomainError);
}

TEST_CASE("alr_inv of large coordinates against extended precision") {
  const auto c = alr_inv(AlrCoords(vec({700, 0}), 3));
  // exact: parts proportional to (e^700, 1, 1)
  const long double e = std::exp(700.0L);
  const long double denom = e + 2.0L;
  CHECK(std::isfinite(c[0]));
  CHECK(c[0] == Approx(static_cast<double>(e / denom)).epsilon(1e-15));
  CHECK(c[0] == Approx(1.0));
  CHECK(c[1] > 0.0);
  CHECK(c[1] == Approx(static_cast<double>(1.0L / denom)).epsilon(1e-12));
}

TEST_CASE("roundtrip for every reference") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int parts = 2 + rep % 6;
    const Composition c(test::random_composition(rng, parts));
    for (int ref = 1; ref <= parts; ++ref) {
      const auto back = alr_inv(alr(c, ref));
      REQUIRE((back.values() - c.values()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("permuting non-reference parts permutes the coordinates") {
  const Composition c(vec({0.1, 0.2, 0.3, 0.4}));
  const Composition p(vec({0.3, 0.1, 0.2, 0.4}));
  const auto zc = alr(c, 4).values();
  const auto zp = alr(p, 4).values();
  CHECK(zp[0] == Approx(zc[2]));
  CHECK(zp[1] == Approx(zc[0]));
  CHECK(zp[2] == Approx(zc[1]));
}

TEST_CASE("suggest_reference") {
  Eigen::MatrixXd m(4, 3);
  m << 0.2, 0.3, 0.5,  //
      0.4, 0.1, 0.5,   //
      0.1, 0.4, 0.5,   //
      0.3, 0.2, 0.5;
  CHECK(suggest_reference(m) == 3);

  Eigen::MatrixXd same(5, 4);
  for (int i = 0; i < 5; ++i) same.row(i) << 0.1, 0.2, 0.3, 0.4;
  CHECK(suggest_reference(same) == 1);

  CHECK_THROWS_AS(suggest_reference(m.topRows(1)), InsufficientDataError);
}

TEST_CASE("suggest_reference matches brute-force variances") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd m(50, 4);
    for (int i = 0; i < 50; ++i) m.row(i) = test::random_composition(rng, 4).transpose();
    int best = 0;
    double best_var = 1e300;
    for (int d = 0; d < 4; ++d) {
      double s = 0.0, s2 = 0.0;
      for (int i = 0; i < 50; ++i) {
        const double l = std::log(m(i, d));
        s += l;
        s2 += l * l;
      }
      const double var = (s2 - s * s / 50.0) / 49.0;
      if (var < best_var) {
        best_var = var;
        best = d + 1;
      }
    }
    CHECK(suggest_reference(m) == best);
  }
}

TEST_CASE("alr_rows matches row-wise alr") {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd m(6, 3);
  for (int i = 0; i < 6; ++i) m.row(i) = test::random_composition(rng, 3).transpose();
  const auto z = alr_rows(m, 2);
  for (int i = 0; i < 6; ++i) {
    const auto zi = alr(Composition(m.row(i).transpose()), 2).values();
    CHECK((z.row(i).transpose() - zi).norm() < 1e-14);
  }
}

TEST_CASE("zero replacement") {
  Eigen::MatrixXd raw(2, 3);
  raw << 0.5, 0.5, 0.0,  //
      0.2, 0.3, 0.5;
  const auto r = replace_zeros(raw, 1e-6);
  CHECK(r.replaced_cells == 1);
  CHECK(r.compositions(0, 2) > 0.0);
  CHECK(r.compositions.row(0).sum() == Approx(1.0).epsilon(1e-14));
  CHECK(r.compositions(1, 2) == Approx(0.5));
}

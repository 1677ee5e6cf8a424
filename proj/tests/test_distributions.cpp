#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "lndm/coda.hpp"
#include "lndm/distributions.hpp"
#include "lndm/error.hpp"
#include "lndm/special.hpp"
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

// Series oracles, independent of the library's recurrence + asymptotics.
double trigamma_series(double x) {
  // sum_{k>=0} 1/(x+k)^2 with an integral tail correction
  const int terms = 200000;
  double s = 0.0;
  for (int k = terms - 1; k >= 0; --k) s += 1.0 / ((x + k) * (x + k));
  const double t = x + terms;
  return s + 1.0 / t + 0.5 / (t * t) + 1.0 / (6.0 * t * t * t);
}

double digamma_series(double x) {
  // psi(x) = -euler + sum_{k>=0} (1/(k+1) - 1/(k+x))
  const double euler = 0.57721566490153286061;
  const int terms = 2000000;
  double s = 0.0;
  for (int k = terms - 1; k >= 0; --k) s += 1.0 / (k + 1.0) - 1.0 / (k + x);
  // tail ~ (x-1)/N
  return -euler + s + (x - 1.0) / (terms + 0.5 * x);
}

}  // namespace

TEST_CASE("special functions against series") {
  for (double x : {0.3, 1.0, 2.5, 7.0, 31.0}) {
    CHECK(special::trigamma(x) == Approx(trigamma_series(x)).epsilon(1e-9));
    CHECK(special::digamma(x) == Approx(digamma_series(x)).epsilon(1e-7));
  }
  CHECK(special::trigamma(1.0) == Approx(test::kPi * test::kPi / 6.0).epsilon(1e-13));
  CHECK(special::digamma(1.0) == Approx(-0.57721566490153286061).epsilon(1e-13));
  CHECK(special::digamma(0.5) == Approx(-0.57721566490153286061 - 2.0 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("dirichlet_logpdf known values") {
  CHECK(dirichlet_logpdf(Composition(vec({0.2, 0.3, 0.5})), DirichletParams(vec({1, 1, 1}))) ==
        Approx(std::log(2.0)).epsilon(1e-13));
  // B(2,1,1) = G(2)G(1)G(1)/G(4) = 1/6, density 6 * 0.5
  CHECK(dirichlet_logpdf(Composition(vec({0.5, 0.25, 0.25})), DirichletParams(vec({2, 1, 1}))) ==
        Approx(std::log(3.0)).epsilon(1e-13));
  CHECK_THROWS_AS(dirichlet_logpdf(Composition(vec({0.5, 0.5})), DirichletParams(vec({2, 1, 1}))), DimensionError);
  CHECK_THROWS_AS(DirichletParams(vec({1, 0, 1})), DomainError);
}

TEST_CASE("dirichlet density integrates to one") {
  // importance sampling from the uniform density 2 on the 2-simplex
  std::mt19937_64 rng(21);
  const DirichletParams unif(vec({1, 1, 1}));
  const DirichletParams p(vec({2, 3, 4}));
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd y = sample_dirichlet(unif, rng);
    const double w = std::exp(dirichlet_logpdf(Composition(y), p)) / 2.0;
    s += w;
    s2 += w * w;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < std::max(3.0 * se, 1e-3));
  CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("dirichlet moments") {
  const auto m = dirichlet_moments(DirichletParams(vec({1, 1, 1})));
  for (int d = 0; d < 3; ++d) {
    CHECK(m.mean[d] == Approx(1.0 / 3.0));
    // a_d (a0 - a_d) / (a0^2 (a0 + 1)) = 1 * 2 / (9 * 4)
    CHECK(m.variance[d] == Approx(1.0 / 18.0));
  }
  CHECK(m.covariance(0, 1) == Approx(-1.0 / 36.0));
  CHECK(m.covariance(1, 1) == Approx(1.0 / 18.0));

  std::mt19937_64 rng(5);
  const DirichletParams p(vec({0.7, 2.0, 3.5, 1.2}));
  const auto mp = dirichlet_moments(p);
  const int n = 100000;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) s += sample_dirichlet(p, rng);
  s /= n;
  for (int d = 0; d < 4; ++d) CHECK(std::abs(s[d] - mp.mean[d]) < 3.0 * std::sqrt(mp.variance[d] / n));
}

TEST_CASE("matched logistic normal") {
  const auto m = match_ln_to_dirichlet(DirichletParams(vec({1, 1, 1})));
  CHECK(m.mu.norm() < 1e-14);
  const double t1 = trigamma_series(1.0);
  CHECK(m.sigma(0, 0) == Approx(2.0 * t1).epsilon(1e-9));
  CHECK(m.sigma(0, 1) == Approx(t1).epsilon(1e-9));
  CHECK(m.sigma(0, 0) == Approx(test::kPi * test::kPi / 3.0).epsilon(1e-12));
  CHECK(m.gamma == Approx(test::kPi * test::kPi / 6.0).epsilon(1e-12));

  for (double a : {0.1, 0.9, 4.0, 60.0}) {
    const auto s = match_ln_to_dirichlet(DirichletParams(Eigen::VectorXd::Constant(3, a)));
    CHECK(s.mu.cwiseAbs().maxCoeff() < 1e-13);
  }

  const auto g = match_ln_to_dirichlet(DirichletParams(vec({2, 3, 4})));
  CHECK(g.mu[0] == Approx(digamma_series(2) - digamma_series(4)).epsilon(1e-7));
  CHECK(g.mu[1] == Approx(digamma_series(3) - digamma_series(4)).epsilon(1e-7));
  CHECK(g.sigma2[1] == Approx(trigamma_series(3)).epsilon(1e-9));
  CHECK(g.gamma == Approx(trigamma_series(4)).epsilon(1e-9));
  CHECK((g.sigma - dirichlet_covariance(g.sigma2, g.gamma)).norm() < 1e-14);
}

TEST_CASE("matched covariance shrinks as the precision grows") {
  double prev = 1e300;
  for (double c : {0.5, 1.0, 2.0, 8.0, 64.0, 512.0}) {
    const auto m = match_ln_to_dirichlet(DirichletParams(Eigen::VectorXd::Constant(3, c)));
    CHECK(m.sigma(0, 0) < prev);
    prev = m.sigma(0, 0);
  }
  CHECK(prev < 0.01);
}

TEST_CASE("matched parameters beat perturbations in Monte Carlo KL") {
  // KL(Dir || LN) = E_Dir[log p_dir(y) - log q(y)]; shared draws make the
  // comparison a paired one.
  std::mt19937_64 rng(13);
  const DirichletParams p(vec({2, 3, 4}));
  const auto m = match_ln_to_dirichlet(p);
  const int n = 100000;
  std::vector<Eigen::VectorXd> z(n);
  Eigen::VectorXd logp(n);
  for (int i = 0; i < n; ++i) {
    const Composition y(sample_dirichlet(p, rng));
    logp[i] = dirichlet_logpdf(y, p);
    z[i] = alr(y, 3).values();
  }
  auto kl_terms = [&](const Eigen::VectorXd& mu, const Eigen::MatrixXd& s) {
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) {
      const Composition y = alr_inv(AlrCoords(z[i], 3));
      const double jac = -y.values().array().log().sum();
      t[i] = logp[i] - (mvn_logpdf(z[i], mu, s) + jac);
    }
    return t;
  };
  const Eigen::VectorXd base = kl_terms(m.mu, m.sigma);
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd mu = m.mu;
    Eigen::MatrixXd s = m.sigma;
    if (k < 2) mu[k] += 0.05;
    else if (k < 4) mu[k - 2] -= 0.05;
    else {
      s(k - 4, k - 4) += 0.05;
    }
    const Eigen::VectorXd diff = kl_terms(mu, s) - base;
    const double mean = diff.mean();
    const double se = std::sqrt((diff.array() - mean).square().sum() / (n - 1) / n);
    CHECK(mean > -3.0 * se);
  }
}

TEST_CASE("lnd_logpdf") {
  const LndParams p(vec({0.3, -0.2}), vec({1, 1}), 0.0);
  CHECK(lnd_logpdf(AlrCoords(vec({0.3, -0.2}), 3), p) == Approx(-std::log(2.0 * test::kPi)).epsilon(1e-14));

  const LndParams q(vec({0.1, 0.4, -1.0}), vec({0.5, 2.0, 1.3}), 0.0);
  const Eigen::VectorXd x = vec({1.0, -0.3, 0.2});
  double sum = 0.0;
  for (int d = 0; d < 3; ++d) sum += test::normal_logpdf(x[d], q.mu()[d], q.sigma2()[d]);
  CHECK(std::abs(lnd_logpdf(AlrCoords(x, 4), q) - sum) < 1e-12);

  const LndParams r(vec({0.1, 0.4}), vec({0.5, 0.4}), 0.1);
  CHECK(lnd_logpdf(AlrCoords(vec({0.3, 1.0}), 3), r) ==
        Approx(test::dense_mvn_logpdf(vec({0.3, 1.0}), r.mu(), r.covariance())).epsilon(1e-12));
  CHECK_THROWS_AS(LndParams(vec({0, 0}), vec({1, 1}), -0.1), DomainError);
}

TEST_CASE("simplex-scale logistic normal integrates to one") {
  // E_{uniform simplex}[q(y) / 2]
  std::mt19937_64 rng(31);
  const DirichletParams unif(vec({1, 1, 1}));
  const LndParams p(vec({0.2, -0.3}), vec({0.6, 0.5}), 0.2);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Composition y(sample_dirichlet(unif, rng));
    const double w = std::exp(lnd_logpdf(alr(y, 3), p, DensityScale::Simplex)) / 2.0;
    s += w;
    s2 += w * w;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < std::max(3.0 * se, 2e-3));
}

TEST_CASE("dirichlet_covariance") {
  const auto s = dirichlet_covariance(vec({0.5, 0.4}), 0.1);
  CHECK(s(0, 0) == Approx(0.6));
  CHECK(s(0, 1) == Approx(0.1));
  CHECK(s(1, 0) == Approx(0.1));
  CHECK(s(1, 1) == Approx(0.5));

  const auto d = dirichlet_covariance(vec({0.5, 0.4, 2.0}), 0.0);
  CHECK((d - Eigen::Vector3d(0.5, 0.4, 2.0).asDiagonal().toDenseMatrix()).norm() == 0.0);

  CHECK_THROWS_AS(dirichlet_covariance(vec({0.5, 0.4}), -0.01), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 2 + rep % 5;
    Eigen::VectorXd s2(k);
    for (int i = 0; i < k; ++i) s2[i] = u(rng);
    const auto c = dirichlet_covariance(s2, u(rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("Sherman-Morrison density equals the dense one") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 1 + rep % 5;
    const Eigen::VectorXd x = test::normals(rng, k);
    const Eigen::VectorXd mu = test::normals(rng, k);
    const Eigen::VectorXd s2 = (test::normals(rng, k).array().square() + 0.1).matrix();
    const double g = 0.3 * (rep % 4);
    CHECK(dirichlet_cov_logpdf(x, mu, s2, g) ==
          Approx(test::dense_mvn_logpdf(x, mu, dirichlet_covariance(s2, g))).epsilon(1e-12));
  }
}

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace lndm::test {

constexpr double kPi = 3.14159265358979323846;

inline Eigen::VectorXd random_composition(std::mt19937_64& rng, int parts) {
  std::gamma_distribution<double> g(1.5, 1.0);
  Eigen::VectorXd v(parts);
  for (int i = 0; i < parts; ++i) v[i] = g(rng) + 1e-3;
  return v / v.sum();
}

inline Eigen::VectorXd normals(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

// Textbook multivariate normal log density through a dense inverse.
inline double dense_mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& s) {
  const Eigen::VectorXd r = x - mu;
  const double quad = r.dot(s.inverse() * r);
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * kPi) + std::log(s.determinant()) + quad);
}

inline double normal_logpdf(double x, double mu, double var) {
  return -0.5 * (std::log(2.0 * kPi * var) + (x - mu) * (x - mu) / var);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lndm::test

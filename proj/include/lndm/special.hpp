#pragma once

namespace lndm::special {

/// psi(x) for x > 0. Upward recurrence to x >= 6, then the asymptotic
/// Bernoulli series; relative error below 1e-12 on (0, inf).
double digamma(double x);

/// psi'(x) for x > 0, same evaluation scheme as digamma.
double trigamma(double x);

}  // namespace lndm::special

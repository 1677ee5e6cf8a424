#include "lndm/special.hpp"

#include <cmath>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm::special {

namespace {

constexpr double kAsymptoticStart = 6.0;

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << name << ": argument must be positive and finite, got " << x;
    throw DomainError(msg.str());
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticStart) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // sum_k B_2k / (2k x^2k), k = 1..7, Horner in 1/x^2
  const double series =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r * (1.0 / 12)))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticStart) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // sum_k B_2k / x^(2k+1), k = 1..8
  const double series =
      r * (1.0 / 6 -
           r * (1.0 / 30 -
                r * (1.0 / 42 -
                     r * (1.0 / 30 -
                          r * (5.0 / 66 - r * (691.0 / 2730 - r * (7.0 / 6 - r * (3617.0 / 510))))))));
  return shift + 1.0 / x + 0.5 * r + series / x;
}

}  // namespace lndm::special

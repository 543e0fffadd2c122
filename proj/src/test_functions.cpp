#include "crossdiff/test_functions.hpp"

#include <cmath>

namespace crossdiff {

double Bump::value(double z) const {
  const double r = (z - center) / half_width;
  const double q = 1.0 - r * r;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

double Bump::derivative(double z) const {
  const double r = (z - center) / half_width;
  const double q = 1.0 - r * r;
  if (q <= 0.0) return 0.0;
  return value(z) * (-2.0 * r / (q * q)) / half_width;
}

double Bump::second_derivative(double z) const {
  const double r = (z - center) / half_width;
  const double q = 1.0 - r * r;
  if (q <= 0.0) return 0.0;
  // d/dr of g = -2r/q^2 is -2/q^2 - 8r^2/q^3.
  const double g = -2.0 * r / (q * q);
  const double g_prime = -2.0 / (q * q) - 8.0 * r * r / (q * q * q);
  return value(z) * (g * g + g_prime) / (half_width * half_width);
}

}  // namespace crossdiff

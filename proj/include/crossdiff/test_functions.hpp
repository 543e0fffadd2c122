#pragma once

#include <string>

namespace crossdiff {

/// exp(1 - 1/(1 - r^2)) with r = (z - center)/half_width, zero for |r| >= 1. Peak value 1.
struct Bump {
  double center = 0.0;
  double half_width = 1.0;

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
  double value(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;
};

/// Space-time test function phi(t, x) = time(t) * space(x).
struct TestFunction {
  std::string id;
  Bump time;
  Bump space;

  double value(double t, double x) const { return time.value(t) * space.value(x); }
  double dt(double t, double x) const { return time.derivative(t) * space.value(x); }
  double dx(double t, double x) const { return time.value(t) * space.derivative(x); }
  double dxx(double t, double x) const { return time.value(t) * space.second_derivative(x); }
};

}  // namespace crossdiff

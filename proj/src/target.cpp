#include "narrownet/target.hpp"

#include "narrownet/network.hpp"

#include <algorithm>
#include <string>

namespace narrownet {

double f_eval(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += (v - 0.5) * (v - 0.5);
  return s;
}

double const_supnorm(double c) {
  return std::max(std::abs(c), std::abs(constants::kBoundaryValue - c));
}

namespace {

// Moments of r^2 = f(x) for r distributed with density proportional to r^(n-1) on [0, 1/2].
double second_moment(std::size_t n) {
  const double dn = static_cast<double>(n);
  return dn / (dn + 2.0) * 0.25;
}

double fourth_moment(std::size_t n) {
  const double dn = static_cast<double>(n);
  return dn / (dn + 4.0) / 16.0;
}

}  // namespace

double const_mse_expected(double c, std::size_t n) {
  if (n < 1) throw Error("const_mse_expected: n must be >= 1");
  return fourth_moment(n) - 2.0 * c * second_moment(n) + c * c;
}

double best_constant(std::size_t n) {
  if (n < 1) throw Error("best_constant: n must be >= 1");
  return second_moment(n);
}

bool in_ball(std::span<const double> x, const BallDomain& domain) {
  if (x.size() != domain.n)
    throw Error("in_ball: point has dimension " + std::to_string(x.size()) + ", domain has " +
                std::to_string(domain.n));
  return f_eval(x) <= domain.radius * domain.radius;
}

}  // namespace narrownet

#pragma once

#include "narrownet/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace narrownet {

/// Closed ball K of radius 1/2 about (1/2, ..., 1/2).
struct BallDomain {
  std::size_t n = 2;
  double radius = 0.5;

  explicit BallDomain(std::size_t dim) : n(dim) {}
  std::vector<double> center() const { return std::vector<double>(n, 0.5); }
};

namespace constants {
inline constexpr double kEta = 1.0 / 16.0;
inline const double kInnerRadius = 1.0 / std::sqrt(8.0);
inline constexpr double kBoundaryValue = 0.25;
inline constexpr double kInnerValue = 0.125;
}  // namespace constants

/// Squared distance to the ball center.
double f_eval(std::span<const double> x);

/// Exact sup-norm of f - c over K; f takes every value in [0, 1/4] on K.
double const_supnorm(double c);

/// Expected (f - c)^2 for x uniform on K in dimension n.
double const_mse_expected(double c, std::size_t n);

/// MSE-optimal constant, E[f] = n / (4 (n + 2)).
double best_constant(std::size_t n);

/// Closed-ball membership; throws Error on dimension mismatch.
bool in_ball(std::span<const double> x, const BallDomain& domain);

}  // namespace narrownet

#include "narrownet/sampling.hpp"
#include "narrownet/target.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace narrownet;

namespace {

// |f - c| maximized over a dense polar grid of the closed disc; independent of const_supnorm.
double dense_disc_supnorm(double c) {
  double best = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double r = 0.5 * i / 400.0;
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * M_PI * k / 64.0;
      const std::vector<double> x{0.5 + r * std::cos(t), 0.5 + r * std::sin(t)};
      best = std::max(best, std::abs(f_eval(x) - c));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("f_eval") {
  CHECK(f_eval(std::vector<double>{0.5, 0.5, 0.5}) == 0.0);
  CHECK(f_eval(std::vector<double>{0.0, 0.0}) == 0.5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(n);
      double norm = 0.0;
      for (auto& v : x) norm += (v = g(rng)) * v;
      for (auto& v : x) v = 0.5 + 0.5 * v / std::sqrt(norm);
      CHECK(f_eval(x) == doctest::Approx(constants::kBoundaryValue).epsilon(1e-14));
      for (auto& v : x) v = 0.5 + (v - 0.5) * 2.0 * constants::kInnerRadius;
      CHECK(std::abs(f_eval(x) - constants::kInnerValue) < 1e-12);
    }
  }
}

TEST_CASE("const_supnorm") {
  CHECK(const_supnorm(0.125) == 0.125);
  CHECK(const_supnorm(0.0) == 0.25);
  CHECK(const_supnorm(3.0 / 16.0) == 0.1875);
  CHECK(const_supnorm(-0.1) == doctest::Approx(0.35));
  CHECK(const_supnorm(0.4) == doctest::Approx(0.4));
  for (double c : {0.0, 0.0625, 0.125, 0.1875, 0.25})
    CHECK(std::abs(dense_disc_supnorm(c) - const_supnorm(c)) < 1e-4);

  double best_c = -1.0, best = 1e9;
  for (int i = 0; i <= 2500; ++i) {
    const double c = 1e-4 * i;
    if (const_supnorm(c) < best) best = const_supnorm(c), best_c = c;
  }
  CHECK(std::abs(best_c - 0.125) <= 1e-4);
  CHECK(std::abs(best - 0.125) <= 1e-4);
}

TEST_CASE("const_mse_expected matches the constant-loss table") {
  // L(f, k/16) at n = 5: 0.0163, 0.0057, 0.0029, 0.0079.
  const double reported[] = {0.0163, 0.0057, 0.0029, 0.0079};
  for (int k = 1; k <= 4; ++k)
    CHECK(std::abs(const_mse_expected(k / 16.0, 5) - reported[k - 1]) <= 2e-4);
  CHECK(const_mse_expected(2.0 / 16.0, 5) == doctest::Approx(0.00570).epsilon(2e-3));
  CHECK(const_mse_expected(1.0 / 16.0, 5) == doctest::Approx(0.01631).epsilon(1e-3));
  CHECK(const_mse_expected(0.0, 2) == doctest::Approx(1.0 / 48.0));
  CHECK_THROWS_AS(const_mse_expected(0.1, 0), Error);
}

TEST_CASE("const_mse_expected Monte Carlo oracle") {
  // 10^6 uniform points in the disc by rejection from the square.
  const Sample s = uniform_rejection_sample(2, 1'000'000, 99);
  double acc = 0.0;
  for (double t : s.targets) acc += t * t;
  CHECK(std::abs(acc / s.size() - const_mse_expected(0.0, 2)) < 2e-4);
}

TEST_CASE("best_constant") {
  CHECK(best_constant(5) == doctest::Approx(5.0 / 28.0));
  CHECK(std::abs(best_constant(5) - 3.0 / 16.0) < 0.01);
  CHECK(best_constant(2) == doctest::Approx(0.125));
  CHECK(best_constant(100000) == doctest::Approx(0.25).epsilon(1e-4));

  for (std::size_t n : {1u, 2u, 5u, 11u}) {
    // Grid argmin and a central finite-difference slope of zero at the analytic minimizer.
    double best_c = 0.0, best = 1e9;
    for (int i = 0; i <= 25000; ++i) {
      const double c = 1e-5 * i;
      if (const_mse_expected(c, n) < best) best = const_mse_expected(c, n), best_c = c;
    }
    CHECK(std::abs(best_c - best_constant(n)) <= 1e-5);
    const double h = 1e-4, c0 = best_constant(n);
    CHECK(std::abs(const_mse_expected(c0 + h, n) - const_mse_expected(c0 - h, n)) / (2 * h) < 1e-9);
  }
}

TEST_CASE("in_ball") {
  const BallDomain k2(2);
  CHECK(in_ball(std::vector<double>{0.5, 0.5}, k2));
  CHECK_FALSE(in_ball(std::vector<double>{0.0, 0.0}, k2));
  CHECK(in_ball(std::vector<double>{0.0, 0.5}, k2));
  CHECK_THROWS_AS(in_ball(std::vector<double>{0.5}, k2), Error);
}

#include "narrownet/autograd.hpp"
#include "narrownet/target.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace narrownet;

namespace {

Sample single_point(std::span<const double> x) {
  Sample s;
  s.n = x.size();
  s.push(x);
  return s;
}

double brute_grid_mean(double c) {
  const Sample g = grid_sample(2, 100);
  long double acc = 0.0;
  for (double t : g.targets) acc += (t - c) * (t - c);
  return static_cast<double>(acc / g.size());
}

ReluNetwork constant_network(std::size_t n, double c) {
  ReluNetwork net({n, 1, 0});
  net.layers[0].bias[0] = c;
  return net;
}

}  // namespace

TEST_CASE("mse_loss") {
  const Sample grid = grid_sample(2, 100);
  const double n0 = mse_loss(constant_network(2, 0.125), grid);
  CHECK(std::abs(n0 - 0.0051) <= 2e-4);
  CHECK(n0 == doctest::Approx(brute_grid_mean(0.125)).epsilon(1e-12));
  const double zero = mse_loss(constant_network(2, 0.0), grid);
  CHECK(zero == doctest::Approx(brute_grid_mean(0.0)).epsilon(1e-12));
  CHECK(std::abs(zero - 0.0208) <= 4e-4);

  const ReluNetwork net = init_network({2, 3, 2}, 5);
  const std::vector<double> x{0.3, 0.6};
  const double r = f_eval(x) - forward(net, x);
  CHECK(mse_loss(net, single_point(x)) == doctest::Approx(r * r).epsilon(1e-15));

  Sample empty;
  empty.n = 2;
  CHECK_THROWS_AS(mse_loss(net, empty), Error);
}

TEST_CASE("loss is the size-weighted mean of single-point losses") {
  const Sample s = radial_ball_sample(5, 100'000, 21);
  const ReluNetwork net = init_network({5, 5, 10}, 3);
  const double whole = mse_loss(net, s);
  long double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += mse_loss(net, single_point(s.point(i)));
  CHECK(std::abs(whole - static_cast<double>(acc / s.size())) < 1e-12);
}

TEST_CASE("affine network gradient is closed form") {
  ReluNetwork net({3, 1, 0});
  net.layers[0].weights = {0.2, -0.4, 0.7};
  net.layers[0].bias = {0.05};
  const std::vector<double> x{0.1, 0.8, 0.4};
  const double residual = forward(net, x) - f_eval(x);
  const GradientSet g = grad_mse(net, single_point(x));
  CHECK(g.layers[0].bias[0] == doctest::Approx(2 * residual));
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(g.layers[0].weights[j] == doctest::Approx(2 * residual * x[j]));
}

TEST_CASE("dead hidden layer passes gradient only to the final bias") {
  ReluNetwork net = init_network({2, 3, 1}, 12);
  for (auto& b : net.layers[0].bias) b = -5.0;  // pre <= 0 on all of [0,1]^2
  const Sample batch = radial_ball_sample(2, 64, 1);
  const GradientSet g = grad_mse(net, batch);
  for (double v : g.layers[0].weights) CHECK(v == 0.0);
  for (double v : g.layers[0].bias) CHECK(v == 0.0);
  for (double v : g.layers[1].weights) CHECK(v == 0.0);
  double mean_residual = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    mean_residual += forward(net, batch.point(i)) - batch.targets[i];
  mean_residual /= batch.size();
  CHECK(g.layers[1].bias[0] == doctest::Approx(2 * mean_residual).epsilon(1e-13));

  const auto fd = grad_check(net, batch, 1e-6);
  CHECK(fd.compared_points == batch.size());
  CHECK(fd.max_rel_error < 1e-6);
}

TEST_CASE("grad_check on random networks across the experiment grid") {
  std::mt19937_64 rng(31);
  std::size_t excluded = 0, compared = 0;
  for (std::size_t n : {2u, 5u})
    for (std::size_t w : {n, n + 1})
      for (std::size_t d : {1u, 2u, 8u, 10u, 20u})
        for (int trial = 0; trial < 10; ++trial) {
          const ReluNetwork net = testing::random_configuration({n, w, d}, rng);
          const Sample batch = radial_ball_sample(n, 1 + trial % 4, rng());
          const auto r = grad_check(net, batch, 1e-6);
          CHECK(r.max_rel_error < 1e-6);
          excluded += r.excluded_points;
          compared += r.compared_points;
        }
  CHECK(excluded * 20 < excluded + compared);
}

TEST_CASE("grad_check edge cases") {
  const ReluNetwork zero({2, 2, 0});
  CHECK(grad_check(zero, single_point(std::vector<double>{0.5, 0.5}), 1e-6).max_rel_error == 0.0);

  // The all-zero deep network sits on every kink and is excluded outright.
  const ReluNetwork flat({2, 2, 3});
  const auto r = grad_check(flat, single_point(std::vector<double>{0.2, 0.5}), 1e-6);
  CHECK(r.compared_points == 0);
  CHECK(r.excluded_points == 1);
  CHECK(r.max_rel_error == 0.0);

  std::mt19937_64 rng(44);
  const ReluNetwork net = testing::random_configuration({2, 3, 2}, rng);
  const Sample batch = radial_ball_sample(2, 3, 9);
  REQUIRE(grad_check(net, batch, 1e-6).excluded_points == 0);
  GradientSet g = grad_mse(net, batch);
  CHECK(compare_gradients(net, batch, 1e-6, g).max_rel_error < 1e-6);
  g.layers[1].weights[2] += 1.0;
  CHECK(compare_gradients(net, batch, 1e-6, g).max_rel_error > 0.1);

  CHECK_THROWS_AS(grad_check(net, batch, 0.0), Error);
  Sample empty;
  empty.n = 2;
  CHECK_THROWS_AS(grad_mse(net, empty), Error);
}

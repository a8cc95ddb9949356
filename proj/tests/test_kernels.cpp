#include "narrownet/kernels.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>

using namespace narrownet;

TEST_CASE("parallel evaluation agrees with the serial reference") {
  const Sample grid = grid_sample(2, 100);
  const Sample radial = radial_ball_sample(5, 30'000, 3);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (const auto& [arch, sample] :
         {std::pair{ArchSpec{2, 2, 8}, &grid}, std::pair{ArchSpec{5, 6, 20}, &radial},
          std::pair{ArchSpec{5, 5, 1}, &radial}, std::pair{ArchSpec{2, 3, 0}, &grid}}) {
      const ReluNetwork net = init_network(arch, seed);
      const SampleEval a = serial::evaluate(net, *sample);
      const SampleEval b = parallel::evaluate(net, *sample);
      CHECK(std::abs(a.mse - b.mse) <= 1e-14 * std::max(1.0, a.mse));
      CHECK(a.sup == b.sup);
      CHECK(a.argmax == b.argmax);
      CHECK(a.zero_counts == b.zero_counts);
      CHECK(a.points == b.points);
    }
  }
}

TEST_CASE("parallel evaluation is independent of the thread count") {
  const Sample s = radial_ball_sample(5, 20'000, 8);
  const ReluNetwork net = init_network({5, 5, 10}, 4);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const SampleEval one = parallel::evaluate(net, s);
  omp_set_num_threads(4);
  const SampleEval four = parallel::evaluate(net, s);
  omp_set_num_threads(saved);
  CHECK(one.mse == four.mse);  // bitwise
  CHECK(one.sup == four.sup);
  CHECK(one.zero_counts == four.zero_counts);
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));
  CompensatedSum a, b;
  a.add(1e100);
  b.add(1.0);
  b.add(-1e100);
  a.add(b);
  CHECK(a.value() == 1.0);
}

TEST_CASE("evaluation errors") {
  const ReluNetwork net = init_network({2, 2, 1}, 0);
  Sample empty;
  empty.n = 2;
  CHECK_THROWS_AS(serial::evaluate(net, empty), Error);
  CHECK_THROWS_AS(parallel::evaluate(net, empty), Error);
  CHECK_THROWS_AS(evaluate_sample(net, radial_ball_sample(3, 10, 1)), Error);
}

// Serial reference vs OpenMP sample evaluation, plus one training epoch for scale.

#include "narrownet/kernels.hpp"
#include "narrownet/optim.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace narrownet;
using clk = std::chrono::steady_clock;

template <class F>
double time_ms(F&& fn, int reps) {
  const auto t0 = clk::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double, std::milli>(clk::now() - t0).count() / reps;
}

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads: %d\n", omp_get_max_threads());

  struct Case {
    const char* label;
    ArchSpec arch;
    Sample sample;
  };
  Case cases[] = {
      {"n2 w2 d8  grid k=100", {2, 2, 8}, grid_sample(2, 100)},
      {"n5 w5 d20 radial 1e5", {5, 5, 20}, radial_ball_sample(5, 100'000, 1)},
      {"n5 w6 d20 radial 1e5", {5, 6, 20}, radial_ball_sample(5, 100'000, 1)},
  };
  for (auto& c : cases) {
    const ReluNetwork net = init_network(c.arch, 7);
    double sink = 0.0;
    const double ser = time_ms([&] { sink += serial::evaluate(net, c.sample).mse; }, reps);
    const double par = time_ms([&] { sink += parallel::evaluate(net, c.sample).mse; }, reps);
    TrainConfig cfg;
    cfg.epochs = 1;
    const double ep = time_ms([&] { sink += train(net, c.sample, cfg).history.back().mse; }, 1);
    std::printf("%-22s  eval serial %8.2f ms  parallel %8.2f ms  speedup %5.2fx  epoch %8.1f ms  (%g)\n",
                c.label, ser, par, ser / par, ep, sink);
  }
  return 0;
}

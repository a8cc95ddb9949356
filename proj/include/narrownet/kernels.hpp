#pragma once

#include "narrownet/network.hpp"
#include "narrownet/sampling.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace narrownet {

/// Neumaier (improved Kahan-Babuska) running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// One pass over a sample: loss, sup-norm estimate and per-neuron zero counts.
struct SampleEval {
  double mse = 0.0;
  double sup = 0.0;
  std::size_t argmax = 0;                 // lowest index attaining sup
  std::vector<std::size_t> zero_counts;   // hidden neurons, layer-major
  std::size_t points = 0;

  std::vector<double> zero_fractions() const;
};

/// Points per summation block in the parallel kernels. Blocks are reduced in
/// index order so results do not depend on the thread count.
inline constexpr std::size_t kEvalBlock = 4096;

namespace serial {
SampleEval evaluate(const ReluNetwork& net, const Sample& sample);
}  // namespace serial

namespace parallel {
SampleEval evaluate(const ReluNetwork& net, const Sample& sample);
}  // namespace parallel

/// Dispatches to the parallel kernel.
SampleEval evaluate_sample(const ReluNetwork& net, const Sample& sample);

}  // namespace narrownet

#include "narrownet/kernels.hpp"

#include <string>

namespace narrownet {

std::vector<double> SampleEval::zero_fractions() const {
  std::vector<double> out(zero_counts.size(), 0.0);
  if (points == 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(zero_counts[i]) / static_cast<double>(points);
  return out;
}

namespace serial {

// Reference implementation: single in-order pass, compensated sum over all points.
SampleEval evaluate(const ReluNetwork& net, const Sample& sample) {
  if (sample.empty()) throw Error("evaluate: empty sample");
  if (sample.n != net.arch.n)
    throw Error("evaluate: sample dimension " + std::to_string(sample.n) +
                " does not match network input " + std::to_string(net.arch.n));
  SampleEval ev;
  ev.points = sample.size();
  ev.zero_counts.assign(net.arch.hidden_neurons(), 0);
  ForwardWorkspace ws(net.arch);
  CompensatedSum sq;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double r = sample.targets[i] - ws.run(net, sample.point(i));
    sq.add(r * r);
    if (std::abs(r) > ev.sup) {
      ev.sup = std::abs(r);
      ev.argmax = i;
    }
    for (std::size_t l = 0; l < net.arch.depth; ++l) {
      auto pre = ws.pre(l);
      for (std::size_t j = 0; j < pre.size(); ++j)
        if (pre[j] <= 0.0) ++ev.zero_counts[l * net.arch.width + j];
    }
  }
  ev.mse = sq.value() / static_cast<double>(sample.size());
  return ev;
}

}  // namespace serial
}  // namespace narrownet

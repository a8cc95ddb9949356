#include "narrownet/kernels.hpp"

#include <omp.h>

#include <string>

namespace narrownet {
namespace parallel {

namespace {

struct BlockResult {
  CompensatedSum sq;
  double sup = 0.0;
  std::size_t argmax = 0;
};

}  // namespace

SampleEval evaluate(const ReluNetwork& net, const Sample& sample) {
  if (sample.empty()) throw Error("evaluate: empty sample");
  if (sample.n != net.arch.n)
    throw Error("evaluate: sample dimension " + std::to_string(sample.n) +
                " does not match network input " + std::to_string(net.arch.n));

  const std::size_t m = sample.size();
  const std::size_t hidden = net.arch.hidden_neurons();
  const std::size_t blocks = (m + kEvalBlock - 1) / kEvalBlock;
  std::vector<BlockResult> partial(blocks);
  std::vector<std::size_t> counts(blocks * hidden, 0);

#pragma omp parallel
  {
    ForwardWorkspace ws(net.arch);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
      BlockResult& out = partial[b];
      std::size_t* zc = counts.data() + b * hidden;
      const std::size_t lo = b * kEvalBlock;
      const std::size_t hi = std::min(m, lo + kEvalBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        const double r = sample.targets[i] - ws.run(net, sample.point(i));
        out.sq.add(r * r);
        if (std::abs(r) > out.sup) {
          out.sup = std::abs(r);
          out.argmax = i;
        }
        for (std::size_t l = 0; l < net.arch.depth; ++l) {
          auto pre = ws.pre(l);
          for (std::size_t j = 0; j < pre.size(); ++j)
            if (pre[j] <= 0.0) ++zc[l * net.arch.width + j];
        }
      }
    }
  }

  SampleEval ev;
  ev.points = m;
  ev.zero_counts.assign(hidden, 0);
  CompensatedSum sq;
  for (std::size_t b = 0; b < blocks; ++b) {
    sq.add(partial[b].sq);
    if (partial[b].sup > ev.sup) {
      ev.sup = partial[b].sup;
      ev.argmax = partial[b].argmax;
    }
    for (std::size_t h = 0; h < hidden; ++h) ev.zero_counts[h] += counts[b * hidden + h];
  }
  ev.mse = sq.value() / static_cast<double>(m);
  return ev;
}

}  // namespace parallel

SampleEval evaluate_sample(const ReluNetwork& net, const Sample& sample) {
  return parallel::evaluate(net, sample);
}

}  // namespace narrownet

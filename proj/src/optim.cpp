#include "narrownet/optim.hpp"

#include "narrownet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace narrownet {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw Error("unknown optimizer '" + name + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error("train: lr must be positive");
  if (optimizer == OptimizerKind::adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw Error("train: Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw Error("train: Adam epsilon must be positive");
  }
}

AdamState::AdamState(const ReluNetwork& net, const TrainConfig& cfg)
    : m(net), v(net), lr(cfg.lr), beta1(cfg.beta1), beta2(cfg.beta2), epsilon(cfg.epsilon) {}

namespace {

// Flush-to-zero / denormals-are-zero for the current thread while training. Decaying
// Adam moments and vanishing gradients in deep nets otherwise spend most of their time
// in subnormal arithmetic.
class FlushDenormals {
 public:
  FlushDenormals() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040);
#endif
  }
  ~FlushDenormals() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

void require_congruent(const GradientSet& g, const ReluNetwork& net, const char* who) {
  if (!g.congruent(net)) throw Error(std::string(who) + ": gradient shape does not match network");
}

}  // namespace

void adam_step(AdamState& state, ReluNetwork& params, const GradientSet& grads) {
  require_congruent(grads, params, "adam_step");
  require_congruent(state.m, params, "adam_step");
  require_congruent(state.v, params, "adam_step");
  ++state.t;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double inv_c1 = 1.0 / c1;
  const double inv_c2 = 1.0 / c2;
  const double lr = state.lr;
  const double eps = state.epsilon;
  auto update = [=](std::vector<double>& theta_v, const std::vector<double>& g_v,
                    std::vector<double>& m_v, std::vector<double>& v_v) {
    double* __restrict theta = theta_v.data();
    const double* __restrict g = g_v.data();
    double* __restrict m = m_v.data();
    double* __restrict v = v_v.data();
    const std::size_t size = theta_v.size();
    for (std::size_t i = 0; i < size; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      theta[i] -= lr * (m[i] * inv_c1) / (std::sqrt(v[i] * inv_c2) + eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weights, grads.layers[l].weights, state.m.layers[l].weights,
           state.v.layers[l].weights);
    update(params.layers[l].bias, grads.layers[l].bias, state.m.layers[l].bias,
           state.v.layers[l].bias);
  }
}

void sgd_step(ReluNetwork& params, const GradientSet& grads, double lr) {
  require_congruent(grads, params, "sgd_step");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const auto& g = grads.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= lr * g.weights[i];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * g.bias[i];
  }
}

EpochMetrics measure(const ReluNetwork& net, const Sample& sample, std::size_t epoch) {
  const SampleEval ev = evaluate_sample(net, sample);
  EpochMetrics m;
  m.epoch = epoch;
  m.mse = ev.mse;
  m.sup_estimate = ev.sup;
  m.zero_fractions = ev.zero_fractions();
  return m;
}

TrainResult train(ReluNetwork net, const Sample& sample, const TrainConfig& config,
                  const EpochHook& hook) {
  config.validate();
  net.validate();
  FlushDenormals ftz;
  if (sample.empty()) throw Error("train: empty sample");
  if (sample.n != net.arch.n) throw Error("train: sample dimension does not match network input");

  TrainResult result;
  result.history.reserve(config.epochs);
  GradientSet grads(net);
  Backprop bp(net.arch);
  AdamState adam(net, config);

  const std::size_t m = sample.size();
  std::vector<std::size_t> order(m);

  for (std::size_t e = 0; e < config.epochs; ++e) {
    ReluNetwork snapshot = net;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.shuffle_seed + e);
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t start = 0; start < m; start += config.batch_size) {
      const std::size_t stop = std::min(m, start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grads.zero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double out = bp.accumulate(net, sample.point(i), sample.targets[i], scale, grads);
        if (!std::isfinite(out))
          throw TrainingError("train: non-finite network output in epoch " + std::to_string(e + 1),
                              std::move(snapshot), e);
      }
      if (config.optimizer == OptimizerKind::adam)
        adam_step(adam, net, grads);
      else
        sgd_step(net, grads, config.lr);
    }

    EpochMetrics metrics = measure(net, sample, e + 1);
    if (!std::isfinite(metrics.mse))
      throw TrainingError("train: non-finite loss after epoch " + std::to_string(e + 1),
                          std::move(snapshot), e);
    if (hook) hook(metrics, net);
    result.history.push_back(std::move(metrics));
  }
  result.net = std::move(net);
  return result;
}

}  // namespace narrownet

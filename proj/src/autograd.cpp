#include "narrownet/autograd.hpp"

#include "narrownet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace narrownet {

GradientSet::GradientSet(const ReluNetwork& net) {
  layers.reserve(net.layers.size());
  for (const auto& layer : net.layers) layers.emplace_back(layer.rows, layer.cols);
}

void GradientSet::zero() {
  for (auto& layer : layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

bool GradientSet::congruent(const ReluNetwork& net) const {
  if (layers.size() != net.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].rows != net.layers[i].rows || layers[i].cols != net.layers[i].cols ||
        layers[i].weights.size() != net.layers[i].weights.size() ||
        layers[i].bias.size() != net.layers[i].bias.size())
      return false;
  return true;
}

double mse_loss(const ReluNetwork& net, const Sample& sample) {
  if (sample.empty()) throw Error("mse_loss: empty sample");
  return evaluate_sample(net, sample).mse;
}

Backprop::Backprop(const ArchSpec& arch)
    : ws_(arch), delta_(std::max<std::size_t>(arch.width, 1)), delta_prev_(delta_.size()) {}

double Backprop::accumulate(const ReluNetwork& net, std::span<const double> x, double target,
                            double scale, GradientSet& grads) {
  const std::size_t depth = net.arch.depth;
  const double out = ws_.run(net, x);
  const double d_out = scale * 2.0 * (out - target);

  auto input_of = [&](std::size_t layer) -> std::span<const double> {
    return layer == 0 ? x : ws_.post(layer - 1);
  };

  // Output layer.
  {
    const auto in = input_of(depth);
    AffineMap& g = grads.layers[depth];
    g.bias[0] += d_out;
    for (std::size_t k = 0; k < in.size(); ++k) g.weights[k] += d_out * in[k];
    if (depth == 0) return out;
    const AffineMap& w = net.layers[depth];
    const auto pre = ws_.pre(depth - 1);
    for (std::size_t k = 0; k < w.cols; ++k) delta_[k] = pre[k] > 0.0 ? w.weights[k] * d_out : 0.0;
  }

  for (std::size_t l = depth; l-- > 0;) {
    const auto in = input_of(l);
    AffineMap& g = grads.layers[l];
    for (std::size_t r = 0; r < g.rows; ++r) {
      const double d = delta_[r];
      if (d == 0.0) continue;
      g.bias[r] += d;
      double* row = g.weights.data() + r * g.cols;
      for (std::size_t c = 0; c < g.cols; ++c) row[c] += d * in[c];
    }
    if (l == 0) break;
    const AffineMap& w = net.layers[l];
    const auto pre = ws_.pre(l - 1);
    for (std::size_t c = 0; c < w.cols; ++c) {
      double acc = 0.0;
      if (pre[c] > 0.0)
        for (std::size_t r = 0; r < w.rows; ++r) acc += w.weights[r * w.cols + c] * delta_[r];
      delta_prev_[c] = acc;
    }
    std::swap(delta_, delta_prev_);
  }
  return out;
}

GradientSet grad_mse(const ReluNetwork& net, const Sample& batch) {
  if (batch.empty()) throw Error("grad_mse: empty batch");
  if (batch.n != net.arch.n)
    throw Error("grad_mse: batch dimension " + std::to_string(batch.n) +
                " does not match network input " + std::to_string(net.arch.n));
  GradientSet grads(net);
  Backprop bp(net.arch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    bp.accumulate(net, batch.point(i), batch.targets[i], scale, grads);
  return grads;
}

namespace {

bool near_kink(const ReluNetwork& net, std::span<const double> x, double margin) {
  const auto trace = forward_trace(net, x);
  for (const auto& layer : trace.pre)
    for (double v : layer)
      if (std::abs(v) < margin) return true;
  return false;
}

double batch_loss(const ReluNetwork& net, const Sample& batch) {
  CompensatedSum s;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = forward(net, batch.point(i)) - batch.targets[i];
    s.add(r * r);
  }
  return s.value() / static_cast<double>(batch.size());
}

Sample kink_free(const ReluNetwork& net, const Sample& batch, double h, std::size_t& excluded) {
  Sample kept;
  kept.n = batch.n;
  excluded = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (near_kink(net, batch.point(i), 10.0 * h)) {
      ++excluded;
      continue;
    }
    const auto p = batch.point(i);
    kept.coords.insert(kept.coords.end(), p.begin(), p.end());
    kept.targets.push_back(batch.targets[i]);
  }
  return kept;
}

}  // namespace

GradCheckResult compare_gradients(const ReluNetwork& net, const Sample& batch, double h,
                                  const GradientSet& analytic) {
  if (h <= 0.0) throw Error("grad_check: step h must be positive");
  if (!analytic.congruent(net)) throw Error("grad_check: gradient shape does not match network");
  GradCheckResult result;
  const Sample kept = kink_free(net, batch, h, result.excluded_points);
  result.compared_points = kept.size();
  if (kept.empty()) return result;

  ReluNetwork probe = net;
  auto check = [&](double& param, double a) {
    const double saved = param;
    param = saved + h;
    const double up = batch_loss(probe, kept);
    param = saved - h;
    const double down = batch_loss(probe, kept);
    param = saved;
    const double b = (up - down) / (2.0 * h);
    const double err = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    result.max_rel_error = std::max(result.max_rel_error, err);
    ++result.compared_entries;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (std::size_t k = 0; k < layer.weights.size(); ++k)
      check(layer.weights[k], analytic.layers[l].weights[k]);
    for (std::size_t k = 0; k < layer.bias.size(); ++k)
      check(layer.bias[k], analytic.layers[l].bias[k]);
  }
  return result;
}

GradCheckResult grad_check(const ReluNetwork& net, const Sample& batch, double h) {
  std::size_t excluded = 0;
  const Sample kept = kink_free(net, batch, h, excluded);
  if (kept.empty()) {
    GradCheckResult r;
    r.excluded_points = excluded;
    return r;
  }
  return compare_gradients(net, batch, h, grad_mse(net, kept));
}

}  // namespace narrownet

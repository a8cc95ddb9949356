#pragma once

#include "narrownet/network.hpp"
#include "narrownet/sampling.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace narrownet {

/// Per-layer gradients; layers[i] mirrors net.layers[i].
struct GradientSet {
  std::vector<AffineMap> layers;

  GradientSet() = default;
  explicit GradientSet(const ReluNetwork& net);

  void zero();
  bool congruent(const ReluNetwork& net) const;
};

/// (1/m) sum (f(x_j) - N(x_j))^2 over the sample.
double mse_loss(const ReluNetwork& net, const Sample& sample);

/// Reverse-mode gradient of the squared error with buffers sized once per architecture.
/// ReLU'(0) = 0.
class Backprop {
 public:
  explicit Backprop(const ArchSpec& arch);

  /// Adds scale * d/dtheta (N(x) - target)^2 to grads; returns N(x).
  double accumulate(const ReluNetwork& net, std::span<const double> x, double target, double scale,
                    GradientSet& grads);

 private:
  ForwardWorkspace ws_;
  std::vector<double> delta_;
  std::vector<double> delta_prev_;
};

/// Exact gradient of mse_loss restricted to the batch.
GradientSet grad_mse(const ReluNetwork& net, const Sample& batch);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t compared_points = 0;
  std::size_t excluded_points = 0;  // within 10h of a ReLU kink
  std::size_t compared_entries = 0;
};

/// Central differences against `analytic`, elementwise error |a-b| / max(1,|a|,|b|).
/// Batch points with any |pre-activation| < 10h are dropped from both sides.
GradCheckResult compare_gradients(const ReluNetwork& net, const Sample& batch, double h,
                                  const GradientSet& analytic);

/// compare_gradients against grad_mse on the kink-free part of the batch.
GradCheckResult grad_check(const ReluNetwork& net, const Sample& batch, double h = 1e-6);

}  // namespace narrownet

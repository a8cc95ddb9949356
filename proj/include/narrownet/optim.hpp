#pragma once

#include "narrownet/autograd.hpp"
#include "narrownet/network.hpp"
#include "narrownet/sampling.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace narrownet {

enum class OptimizerKind { adam, sgd };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::size_t epochs = 50;
  std::size_t batch_size = 1;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t init_seed = 0;

  void validate() const;
};

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::uint64_t t = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  AdamState() = default;
  AdamState(const ReluNetwork& net, const TrainConfig& cfg);
};

/// One bias-corrected Adam update of every parameter.
void adam_step(AdamState& state, ReluNetwork& params, const GradientSet& grads);

void sgd_step(ReluNetwork& params, const GradientSet& grads, double lr);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double mse = 0.0;
  double sup_estimate = 0.0;
  std::vector<double> zero_fractions;
};

using EpochHook = std::function<void(const EpochMetrics&, const ReluNetwork&)>;

struct TrainResult {
  ReluNetwork net;
  std::vector<EpochMetrics> history;
};

/// Raised when the loss stops being finite; carries the last network whose loss was finite.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, ReluNetwork snapshot, std::size_t epoch)
      : Error(what), snapshot_(std::move(snapshot)), epoch_(epoch) {}
  const ReluNetwork& snapshot() const { return snapshot_; }
  std::size_t epoch() const { return epoch_; }

 private:
  ReluNetwork snapshot_;
  std::size_t epoch_;
};

/// Full-sample metrics with no training step.
EpochMetrics measure(const ReluNetwork& net, const Sample& sample, std::size_t epoch = 0);

/// Epoch e (0-based) visits the sample in the order of a shuffle seeded with
/// shuffle_seed + e; metrics are taken on the full sample at each epoch end.
TrainResult train(ReluNetwork net, const Sample& sample, const TrainConfig& config,
                  const EpochHook& hook = {});

}  // namespace narrownet

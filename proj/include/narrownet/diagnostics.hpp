#pragma once

#include "narrownet/network.hpp"
#include "narrownet/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace narrownet {

/// Hidden neuron address; layer is 1-based as in reports, neuron 0-based.
struct NeuronId {
  std::size_t layer = 0;
  std::size_t neuron = 0;
  bool operator==(const NeuronId&) const = default;
};

enum class NeuronState { dead, partial, alive };

std::string to_string(NeuronState state);

struct DeadReport {
  std::size_t width = 0;
  std::size_t depth = 0;
  std::vector<double> zero_fractions;  // layer-major
  std::vector<NeuronId> dead;          // fraction == 1
  std::vector<NeuronId> fully_alive;   // fraction == 0
  std::vector<bool> layer_all_dead;
  std::optional<std::size_t> first_dead_layer;  // 1-based

  double fraction(std::size_t layer, std::size_t neuron) const {
    return zero_fractions[(layer - 1) * width + neuron];
  }
  NeuronState state(std::size_t layer, std::size_t neuron) const;
  /// Neurons at or above `soft` count as near-dead; reporting only.
  std::size_t near_dead_count(double soft = 0.999) const;
  /// Every neuron is dead or fully alive.
  bool dichotomy() const { return dead.size() + fully_alive.size() == zero_fractions.size(); }
};

/// Fraction of sample points at which each hidden neuron outputs 0 (pre-activation <= 0).
std::vector<double> zero_fractions(const ReluNetwork& net, const Sample& sample);

DeadReport classify_dead(const ReluNetwork& net, const Sample& sample);
DeadReport classify_dead(const ArchSpec& arch, const std::vector<double>& fractions);

struct DownstreamCheck {
  bool has_dead_layer = false;
  bool constant_on_sample = false;  // meaningful when has_dead_layer
  double constant = 0.0;            // value propagated from the dead layer's zero output
  double spread = 0.0;              // max - min of forward over the sample
  std::string diagnostic;
};

/// When some layer is all-dead, the network must be constant on the sample.
DownstreamCheck constant_downstream_check(const ReluNetwork& net, const Sample& sample,
                                          const DeadReport& report);

/// Every hidden pre-activation strictly positive.
bool s_n_membership(const ReluNetwork& net, std::span<const double> x);

enum class ProofCase { case1, case2 };

struct CaseReport {
  ProofCase which = ProofCase::case1;
  std::size_t directions_tested = 0;
  std::optional<std::vector<double>> witness;
  std::size_t witness_direction = 0;  // 0-based index of the failing direction
  NeuronId failing_neuron;            // first non-positive pre-activation at the witness
};

/// Points on the sphere of radius 1/sqrt(8) about the center of K.
std::vector<std::vector<double>> inner_sphere_points(std::size_t n, std::size_t count,
                                                     std::uint64_t seed);

CaseReport case_classify(const ReluNetwork& net, std::size_t directions = 10'000,
                         std::uint64_t seed = 0);

/// max |f - N| over the sample.
double supnorm_estimate(const ReluNetwork& net, const Sample& sample);

inline constexpr double kDefaultArgmaxTol = 1e-6;

/// Sample indices with |f - N| >= supnorm_estimate - tol, ascending.
std::vector<std::size_t> argmax_set(const ReluNetwork& net, const Sample& sample,
                                    double tol = kDefaultArgmaxTol);

struct BoundVerdict {
  double sup_estimate = 0.0;
  double eta = 1.0 / 16.0;
  bool passed = false;
  bool width_applicable = false;
};

BoundVerdict bound_check(const ReluNetwork& net, const ArchSpec& arch, const Sample& sample);

/// DOT graph: one node per neuron, rank = layer, label carries the zero-fraction percent.
std::string diagram_dot(const ReluNetwork& net, const DeadReport& report);
void export_diagram(const ReluNetwork& net, const DeadReport& report,
                    const std::filesystem::path& path);

/// S_N checks run on trained models.
struct AffineCollapseCheck {
  std::size_t members = 0;
  double max_error = 0.0;
};

/// |N(x) - collapse(x)| over the S_N members among `probes` random points of K.
AffineCollapseCheck check_affine_collapse(const ReluNetwork& net, std::size_t probes,
                                          std::uint64_t seed);

struct ConvexityCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::size_t members = 0;
};

/// Midpoints of random S_N member pairs drawn from the sample.
ConvexityCheck check_convexity(const ReluNetwork& net, const Sample& sample, std::size_t pairs,
                               std::uint64_t seed);

/// Summary JSON written next to trained models.
std::string diagnostics_json(const ReluNetwork& net, const Sample& sample,
                             const DeadReport& report, std::size_t directions = 10'000,
                             std::uint64_t seed = 0);

}  // namespace narrownet

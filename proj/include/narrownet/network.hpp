#pragma once

#include "narrownet/error.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace narrownet {

/// Shape of a fully connected ReLU network R^n -> R with `depth` hidden
/// layers of equal `width`. depth == 0 is a single affine map.
struct ArchSpec {
  std::size_t n = 1;
  std::size_t width = 1;
  std::size_t depth = 0;

  void validate() const;
  std::size_t num_affine() const { return depth + 1; }
  std::size_t hidden_neurons() const { return width * depth; }
  bool operator==(const ArchSpec&) const = default;
};

/// y = W x + b with W stored row-major (rows = output dim).
struct AffineMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  AffineMap() = default;
  AffineMap(std::size_t out_dim, std::size_t in_dim)
      : rows(out_dim), cols(in_dim), weights(out_dim * in_dim, 0.0), bias(out_dim, 0.0) {}

  double& w(std::size_t r, std::size_t c) { return weights[r * cols + c]; }
  double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

  void apply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> in) const;

  std::size_t parameter_count() const { return weights.size() + bias.size(); }
  bool operator==(const AffineMap&) const = default;
};

struct ReluNetwork {
  ArchSpec arch;
  std::vector<AffineMap> layers;

  ReluNetwork() = default;
  /// Zero-initialized network of the given shape.
  explicit ReluNetwork(const ArchSpec& spec);

  /// Throws Error naming the offending layer if shapes do not chain.
  void validate() const;
  std::size_t parameter_count() const;
  bool operator==(const ReluNetwork&) const = default;
};

struct ActivationTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  std::vector<std::vector<bool>> pattern;
  double output = 0.0;

  bool all_active() const;
};

/// Glorot-uniform weights on [-L, L], L = sqrt(6 / (fan_in + fan_out)); zero biases.
ReluNetwork init_network(const ArchSpec& arch, std::uint64_t seed);

double forward(const ReluNetwork& net, std::span<const double> x);
ActivationTrace forward_trace(const ReluNetwork& net, std::span<const double> x);

/// Composition of all affine layers with every ReLU skipped.
AffineMap collapse_affine(const ReluNetwork& net);

/// Reusable scratch buffers for allocation-free evaluation in hot loops.
class ForwardWorkspace {
 public:
  explicit ForwardWorkspace(const ArchSpec& arch);

  /// Fills pre()/post() for every hidden layer; returns the network output.
  double run(const ReluNetwork& net, std::span<const double> x);

  std::span<const double> pre(std::size_t layer) const;
  std::span<const double> post(std::size_t layer) const;
  std::size_t width() const { return width_; }

 private:
  std::size_t width_;
  std::size_t depth_;
  std::vector<double> pre_;
  std::vector<double> post_;
};

std::string model_to_json(const ReluNetwork& net);
ReluNetwork model_from_json(const std::string& text);
void save_model(const ReluNetwork& net, const std::filesystem::path& path);
ReluNetwork load_model(const std::filesystem::path& path);

}  // namespace narrownet

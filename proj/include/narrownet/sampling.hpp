#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace narrownet {

enum class SampleMethod { grid, uniform, radial, file };

std::string to_string(SampleMethod method);
SampleMethod parse_sample_method(const std::string& name);

/// Finite point set in K with exact targets f(x). Points are stored row-major.
struct Sample {
  std::size_t n = 0;
  std::vector<double> coords;
  std::vector<double> targets;
  SampleMethod method = SampleMethod::file;
  std::size_t param = 0;  // points per axis (grid) or requested count (uniform, radial)
  std::optional<std::uint64_t> seed;
  std::uint64_t proposals = 0;  // uniform: cube draws consumed

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * n, n}; }

  /// Appends x with target f(x).
  void push(std::span<const double> x);
};

/// Name of the normal generator used by the radial sampler, recorded in run metadata.
inline constexpr const char* kNormalMethod =
    "std::normal_distribution<double> (libstdc++ Marsaglia polar) over std::mt19937_64";

inline constexpr std::uint64_t kDefaultGridCap = 50'000'000;

/// Lattice {i/(k-1)}^n (k = 1 gives the origin) intersected with K, row-major order.
Sample grid_sample(std::size_t n, std::size_t k, std::uint64_t cap = kDefaultGridCap);

/// Cube proposals kept when inside K, until `count` points are kept.
Sample uniform_rejection_sample(std::size_t n, std::size_t count, std::uint64_t seed);

/// Normal direction times radius (1/2) U^(1/n), shifted to the center of K.
Sample radial_ball_sample(std::size_t n, std::size_t count, std::uint64_t seed);

std::string sample_to_csv(const Sample& sample);
Sample sample_from_csv(const std::string& text);
void sample_to_file(const Sample& sample, const std::filesystem::path& path);
Sample sample_from_file(const std::filesystem::path& path);

}  // namespace narrownet

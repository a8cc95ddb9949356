#pragma once

#include "narrownet/network.hpp"
#include "narrownet/optim.hpp"
#include "narrownet/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace narrownet {

/// Parsed TOML subset: scalar key/value pairs, [table] and [[array-of-tables]] headers,
/// '#' comments. Values are integers, floats, booleans or basic strings.
namespace toml_lite {

using Value = std::variant<std::int64_t, double, bool, std::string>;

struct Entry {
  Value value;
  std::size_t line = 0;
};

using Table = std::map<std::string, Entry>;

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> arrays;
  std::map<std::string, std::vector<std::size_t>> array_lines;  // header line per element
};

Document parse(const std::string& text);

}  // namespace toml_lite

struct SampleSpec {
  SampleMethod method = SampleMethod::grid;
  std::size_t n = 2;
  std::size_t k = 100;       // grid
  std::size_t count = 7668;  // uniform, radial
  std::uint64_t seed = 0;

  Sample generate() const;
  /// Stable file-name key, e.g. "grid_n2_k100".
  std::string key() const;
  bool operator==(const SampleSpec&) const = default;
};

struct ExperimentConfig {
  std::string name;
  ArchSpec arch;
  SampleSpec sample;
  std::size_t runs = 10;
  TrainConfig train;

  void validate() const;
};

struct SuiteConfig {
  std::uint64_t master_seed = 0;
  std::string output;
  std::size_t scale = 1;
  std::vector<ExperimentConfig> experiments;

  /// Divides sample counts and epochs by `factor` (at least 1 each); grid k is unchanged.
  void apply_scale(std::size_t factor);
};

SuiteConfig parse_suite_config(const std::string& text);
SuiteConfig load_suite_config(const std::filesystem::path& path);

/// Per-run seed master_seed + run_index. Initialization uses it directly; the shuffle
/// stream is offset by 2^20 per run so per-epoch shuffle seeds never collide across runs.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index);
std::uint64_t shuffle_seed_for(std::uint64_t run_seed);

}  // namespace narrownet

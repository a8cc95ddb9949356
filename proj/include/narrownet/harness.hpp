#pragma once

#include "narrownet/config.hpp"
#include "narrownet/diagnostics.hpp"
#include "narrownet/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace narrownet {

inline constexpr const char* kToolVersion = "0.3.0";

struct RunRecord {
  std::string experiment;
  std::size_t run_index = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;
  std::vector<EpochMetrics> history;
  double final_mse = 0.0;
  double final_sup = 0.0;
  DeadReport dead;
  bool constant_network = false;
  double constant_value = 0.0;
  bool ok = true;
  std::string error;
  ReluNetwork model;
  std::filesystem::path model_path;
};

struct ExperimentResult {
  ExperimentConfig config;
  Sample sample;
  std::filesystem::path sample_path;
  std::vector<RunRecord> runs;
};

struct SuiteResult {
  std::filesystem::path dir;
  std::vector<ExperimentResult> experiments;

  const ExperimentResult& find(const std::string& name) const;
};

struct SuiteOptions {
  int threads = 0;  // 0 keeps the OpenMP default
  std::size_t case_directions = 10'000;
  std::ostream* log = nullptr;
};

/// Trains every configured run and writes per-run metrics, models, diagnostics and a
/// manifest under `out`. A run whose loss turns non-finite is recorded as failed.
SuiteResult run_suite(const SuiteConfig& config, const std::filesystem::path& out,
                      const SuiteOptions& options = {});

/// Trains one model with seeds derived from (master_seed, run_index).
RunRecord train_run(const ExperimentConfig& exp, const Sample& sample, std::uint64_t master_seed,
                    std::size_t run_index);

std::string metrics_csv(const std::vector<EpochMetrics>& history, const ArchSpec& arch);
std::vector<EpochMetrics> parse_metrics_csv(const std::string& text);

struct Table1Row {
  std::string label;
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
  std::size_t runs = 0;
  std::size_t expected_runs = 0;
  bool complete() const { return runs == expected_runs && runs > 0; }
};

Table1Row make_table_row(const std::string& label, const std::vector<double>& finals,
                         std::size_t expected_runs);

/// Reads the manifest and final metrics under `results`, writes table1.csv there.
std::vector<Table1Row> aggregate_table(const std::filesystem::path& results);
std::string format_table(const std::vector<Table1Row>& rows);

struct FigureSeries {
  std::vector<double> epoch;
  std::vector<double> mse_best, mse_worst, mse_avg, mse_ref;
  std::vector<double> sup_best, sup_worst, sup_avg, sup_ref;
  std::size_t best_run = 0;
  std::size_t worst_run = 0;
};

/// Best/worst runs chosen by final sup-norm estimate; references are the constant 1/8.
FigureSeries figure_series(const std::vector<std::vector<EpochMetrics>>& histories,
                           double mse_reference);

/// Writes figure_<id>.csv plus two SVG panels into `results`/figures. `id` is an
/// experiment name; "all" emits every experiment. Returns the CSV paths written.
std::vector<std::filesystem::path> emit_figure_data(const std::filesystem::path& results,
                                                    const std::string& id);

/// Writes argmax_<experiment>.csv (group,x_1,x_2) with one group per run plus the circle
/// bounding K. Requires n = 2.
std::filesystem::path emit_argmax_plot_data(const std::filesystem::path& results,
                                            const std::string& experiment,
                                            double tol = kDefaultArgmaxTol);

}  // namespace narrownet

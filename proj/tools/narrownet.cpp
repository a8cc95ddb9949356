// narrownet: sample | train | diagnose | suite | table | figure | argmax

#include "narrownet/config.hpp"
#include "narrownet/diagnostics.hpp"
#include "narrownet/harness.hpp"
#include "narrownet/optim.hpp"
#include "narrownet/sampling.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace narrownet;

namespace {

Sample make_sample(const std::string& method, std::size_t n, std::size_t k, std::size_t count,
                   std::uint64_t seed, const std::string& file) {
  if (!file.empty()) return sample_from_file(file);
  SampleSpec spec;
  spec.method = parse_sample_method(method);
  spec.n = n;
  spec.k = k;
  spec.count = count;
  spec.seed = seed;
  return spec.generate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train and dissect deep, narrow ReLU networks on f(x) = |x - c|^2 over the ball K"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Generate a training sample as CSV");
  std::string method = "grid";
  std::size_t n = 2, k = 100, count = 7668;
  std::uint64_t seed = 0;
  std::string out;
  sample_cmd->add_option("--method", method, "grid | uniform | radial")
      ->check(CLI::IsMember({"grid", "uniform", "radial"}));
  sample_cmd->add_option("--n", n, "Input dimension");
  sample_cmd->add_option("--k", k, "Grid points per axis");
  sample_cmd->add_option("--count", count, "Points kept (uniform, radial)");
  sample_cmd->add_option("--seed", seed, "RNG seed");
  sample_cmd->add_option("--out", out, "Output CSV")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one network and write metrics and model");
  std::size_t w = 2, d = 1;
  std::string sample_file, optimizer = "adam";
  TrainConfig tc;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--n", n, "Input dimension");
  train_cmd->add_option("--w", w, "Hidden width");
  train_cmd->add_option("--d", d, "Hidden layers");
  train_cmd->add_option("--sample", sample_file, "Sample CSV (otherwise generated)");
  train_cmd->add_option("--method", method, "grid | uniform | radial")
      ->check(CLI::IsMember({"grid", "uniform", "radial"}));
  train_cmd->add_option("--k", k, "Grid points per axis");
  train_cmd->add_option("--count", count, "Points kept (uniform, radial)");
  train_cmd->add_option("--sample-seed", seed, "Sample RNG seed");
  train_cmd->add_option("--seed", train_seed, "Run seed (init; shuffle stream derived)");
  train_cmd->add_option("--epochs", tc.epochs, "Epochs");
  train_cmd->add_option("--optimizer", optimizer, "adam | sgd")->check(CLI::IsMember({"adam", "sgd"}));
  train_cmd->add_option("--lr", tc.lr, "Learning rate");
  train_cmd->add_option("--epsilon", tc.epsilon, "Adam epsilon");
  train_cmd->add_option("--batch-size", tc.batch_size, "Batch size");
  train_cmd->add_option("--out", out, "Output directory")->required();

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "Dead-neuron, S_N and bound diagnostics for a model");
  std::string model_file;
  std::size_t directions = 10'000;
  diag_cmd->add_option("--model", model_file, "Model JSON")->required();
  diag_cmd->add_option("--sample", sample_file, "Sample CSV")->required();
  diag_cmd->add_option("--directions", directions, "Inner-sphere directions for the case test");
  diag_cmd->add_option("--seed", seed, "Direction RNG seed");
  diag_cmd->add_option("--out", out, "Output directory (diagnostics.json, diagram.dot)");

  // suite
  auto* suite_cmd = app.add_subcommand("suite", "Run an experiment suite from a TOML config");
  std::string config_file;
  std::size_t scale = 1;
  suite_cmd->add_option("--config", config_file, "Suite TOML")->required()->check(CLI::ExistingFile);
  suite_cmd->add_option("--out", out, "Results directory (default: config 'output')");
  suite_cmd->add_option("--scale", scale, "Divide sample counts and epochs (CI runs)");
  bool quiet = false;
  suite_cmd->add_flag("--quiet", quiet, "No progress log");

  // table
  auto* table_cmd = app.add_subcommand("table", "Aggregate min/avg/max final sup-norm per experiment");
  std::string results;
  table_cmd->add_option("--results", results, "Results directory")->required();

  // figure
  auto* fig_cmd = app.add_subcommand("figure", "Per-epoch best/worst/average curves (CSV + SVG)");
  std::string fig_id = "all";
  fig_cmd->add_option("--results", results, "Results directory")->required();
  fig_cmd->add_option("--id", fig_id, "Experiment name or 'all'");

  // argmax
  auto* arg_cmd = app.add_subcommand("argmax", "Maximizers of |f - N| per run (n = 2)");
  std::string experiment;
  double tol = kDefaultArgmaxTol;
  arg_cmd->add_option("--results", results, "Results directory")->required();
  arg_cmd->add_option("--config", experiment, "Experiment name")->required();
  arg_cmd->add_option("--tol", tol, "Tolerance below the maximum");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*sample_cmd) {
      const Sample s = make_sample(method, n, k, count, seed, "");
      sample_to_file(s, out);
      std::cout << "wrote " << s.size() << " points to " << out << '\n';
      if (s.method == SampleMethod::uniform)
        std::cout << "acceptance rate " << static_cast<double>(s.size()) / s.proposals << '\n';
    } else if (*train_cmd) {
      const Sample s = make_sample(method, n, k, count, seed, sample_file);
      ExperimentConfig exp;
      exp.name = "train";
      exp.arch = {s.n, w, d};
      exp.sample.n = s.n;
      exp.runs = 1;
      exp.train = tc;
      exp.train.optimizer = parse_optimizer(optimizer);
      const RunRecord rec = train_run(exp, s, train_seed, 0);
      fs::create_directories(out);
      {
        std::ofstream m(fs::path(out) / "metrics.csv");
        m << metrics_csv(rec.history, exp.arch);
      }
      save_model(rec.model, fs::path(out) / "model.json");
      sample_to_file(s, fs::path(out) / "sample.csv");
      std::cout << (rec.ok ? "done" : "FAILED: " + rec.error) << ": final mse " << rec.final_mse
                << ", sup estimate " << rec.final_sup << ", dead neurons " << rec.dead.dead.size()
                << '\n';
      return rec.ok ? 0 : 2;
    } else if (*diag_cmd) {
      const ReluNetwork net = load_model(model_file);
      const Sample s = sample_from_file(sample_file);
      const DeadReport rep = classify_dead(net, s);
      const std::string js = diagnostics_json(net, s, rep, directions, seed);
      if (out.empty()) {
        std::cout << js << '\n';
      } else {
        fs::create_directories(out);
        std::ofstream(fs::path(out) / "diagnostics.json") << js << '\n';
        export_diagram(net, rep, fs::path(out) / "diagram.dot");
        std::cout << "wrote diagnostics.json and diagram.dot to " << out << '\n';
      }
    } else if (*suite_cmd) {
      SuiteConfig cfg = load_suite_config(config_file);
      cfg.apply_scale(scale);
      if (out.empty()) out = cfg.output;
      if (out.empty()) throw Error("suite: no --out and no 'output' in the config");
      SuiteOptions opts;
      opts.threads = threads;
      opts.log = quiet ? nullptr : &std::cerr;
      run_suite(cfg, out, opts);
      std::cout << format_table(aggregate_table(out));
    } else if (*table_cmd) {
      std::cout << format_table(aggregate_table(results));
    } else if (*fig_cmd) {
      for (const auto& p : emit_figure_data(results, fig_id)) std::cout << "wrote " << p.string() << '\n';
    } else if (*arg_cmd) {
      std::cout << "wrote " << emit_argmax_plot_data(results, experiment, tol).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "narrownet: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

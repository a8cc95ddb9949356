#include "narrownet/harness.hpp"

#include "narrownet/kernels.hpp"
#include "narrownet/svg_plot.hpp"
#include "narrownet/target.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace narrownet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string run_dir_name(std::size_t run) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%02zu", run);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json conventions() {
  return {
      {"depth", "d counts hidden ReLU layers; d + 1 affine maps"},
      {"grid_rule", "k points per axis at i/(k-1) including 0 and 1, closed-ball filter, row-major"},
      {"uniform_rule", "cube proposals kept inside K until `count` points are kept"},
      {"radial_rule", "normal direction, radius 0.5*U^(1/n), shifted by 1/2"},
      {"normal_method", kNormalMethod},
      {"init", "Glorot-uniform weights, zero biases, std::mt19937_64(init_seed)"},
      {"seed_rule", "init_seed = master_seed + run_index; shuffle_seed = init_seed * 2^20"},
      {"shuffle_rule", "epoch e (0-based) permutes identity with std::shuffle over std::mt19937_64(shuffle_seed + e)"},
      {"relu_derivative_at_zero", 0},
      {"dead_threshold", "zero fraction exactly 1.0 on the training sample"},
      {"summation", "Neumaier-compensated, fixed blocks of 4096 points reduced in index order"},
      {"metrics", "evaluated on the full training sample at each epoch end"},
  };
}

json experiment_json(const ExperimentConfig& exp, std::uint64_t master_seed,
                     const std::string& sample_file, std::size_t sample_size) {
  json seeds = json::array();
  for (std::size_t r = 0; r < exp.runs; ++r) {
    const auto s = run_seed(master_seed, r);
    seeds.push_back({{"run", r}, {"init_seed", s}, {"shuffle_seed", shuffle_seed_for(s)}});
  }
  return {
      {"name", exp.name},
      {"n", exp.arch.n},
      {"w", exp.arch.width},
      {"d", exp.arch.depth},
      {"sample",
       {{"method", to_string(exp.sample.method)},
        {"k", exp.sample.k},
        {"count", exp.sample.count},
        {"seed", exp.sample.seed},
        {"key", exp.sample.key()},
        {"file", sample_file},
        {"size", sample_size}}},
      {"runs", exp.runs},
      {"train",
       {{"optimizer", to_string(exp.train.optimizer)},
        {"lr", exp.train.lr},
        {"beta1", exp.train.beta1},
        {"beta2", exp.train.beta2},
        {"epsilon", exp.train.epsilon},
        {"epochs", exp.train.epochs},
        {"batch_size", exp.train.batch_size}}},
      {"seeds", std::move(seeds)},
  };
}

}  // namespace

const ExperimentResult& SuiteResult::find(const std::string& name) const {
  for (const auto& e : experiments)
    if (e.config.name == name) return e;
  throw Error("suite result has no experiment '" + name + "'");
}

std::string metrics_csv(const std::vector<EpochMetrics>& history, const ArchSpec& arch) {
  std::string out = "epoch,mse,sup_estimate";
  for (std::size_t l = 1; l <= arch.depth; ++l)
    for (std::size_t j = 1; j <= arch.width; ++j)
      out += ",zf_" + std::to_string(l) + "_" + std::to_string(j);
  out += '\n';
  for (const auto& m : history) {
    out += std::to_string(m.epoch) + "," + fmt17(m.mse) + "," + fmt17(m.sup_estimate);
    for (double z : m.zero_fractions) out += "," + fmt17(z);
    out += '\n';
  }
  return out;
}

std::vector<EpochMetrics> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("epoch,mse,sup_estimate"))
    throw Error("metrics CSV: missing header");
  std::vector<EpochMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    EpochMetrics m;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      try {
        if (col == 0) m.epoch = std::stoul(cell);
        else if (col == 1) m.mse = std::stod(cell);
        else if (col == 2) m.sup_estimate = std::stod(cell);
        else m.zero_fractions.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error("metrics CSV: malformed cell '" + cell + "'");
      }
      ++col;
    }
    if (col < 3) throw Error("metrics CSV: short row");
    out.push_back(std::move(m));
  }
  return out;
}

RunRecord train_run(const ExperimentConfig& exp, const Sample& sample, std::uint64_t master_seed,
                    std::size_t run_index) {
  RunRecord rec;
  rec.experiment = exp.name;
  rec.run_index = run_index;
  rec.init_seed = run_seed(master_seed, run_index);
  rec.shuffle_seed = shuffle_seed_for(rec.init_seed);

  TrainConfig cfg = exp.train;
  cfg.init_seed = rec.init_seed;
  cfg.shuffle_seed = rec.shuffle_seed;

  ReluNetwork net = init_network(exp.arch, cfg.init_seed);
  try {
    auto result = train(std::move(net), sample, cfg,
                        [&](const EpochMetrics& m, const ReluNetwork&) { rec.history.push_back(m); });
    rec.model = std::move(result.net);
  } catch (const TrainingError& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.model = e.snapshot();
  }
  const EpochMetrics final_metrics =
      rec.history.empty() ? measure(rec.model, sample, 0) : rec.history.back();
  rec.final_mse = final_metrics.mse;
  rec.final_sup = final_metrics.sup_estimate;
  rec.dead = classify_dead(exp.arch, final_metrics.zero_fractions);
  const auto downstream = constant_downstream_check(rec.model, sample, rec.dead);
  rec.constant_network = downstream.has_dead_layer;
  rec.constant_value = downstream.constant;
  if (downstream.has_dead_layer && !downstream.constant_on_sample) {
    rec.ok = false;
    rec.error = downstream.diagnostic;
  }
  return rec;
}

SuiteResult run_suite(const SuiteConfig& config, const fs::path& out, const SuiteOptions& options) {
  if (options.threads > 0) omp_set_num_threads(options.threads);
  fs::create_directories(out / "samples");

  SuiteResult result;
  result.dir = out;
  std::map<std::string, Sample> samples;
  json manifest;
  manifest["tool"] = "narrownet";
  manifest["version"] = kToolVersion;
  manifest["master_seed"] = config.master_seed;
  manifest["scale"] = config.scale;
  manifest["scaled"] = config.scale != 1;
  manifest["conventions"] = conventions();
  manifest["experiments"] = json::array();

  for (const auto& exp : config.experiments) {
    exp.validate();
    const std::string key = exp.sample.key();
    const std::string sample_file = "samples/" + key + ".csv";
    auto it = samples.find(key);
    if (it == samples.end()) {
      it = samples.emplace(key, exp.sample.generate()).first;
      sample_to_file(it->second, out / sample_file);
    }
    const Sample& sample = it->second;

    if (options.log)
      *options.log << "[suite] " << exp.name << ": n=" << exp.arch.n << " w=" << exp.arch.width
                   << " d=" << exp.arch.depth << " sample=" << key << " (" << sample.size()
                   << " points) runs=" << exp.runs << " epochs=" << exp.train.epochs << std::endl;

    ExperimentResult er;
    er.config = exp;
    er.sample = sample;
    er.sample_path = out / sample_file;
    er.runs.resize(exp.runs);
    const fs::path exp_dir = out / exp.name;
    fs::create_directories(exp_dir);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(exp.runs); ++r) {
      RunRecord rec = train_run(exp, sample, config.master_seed, static_cast<std::size_t>(r));
      const fs::path run_dir = exp_dir / run_dir_name(rec.run_index);
      fs::create_directories(run_dir);
      write_text(run_dir / "metrics.csv", metrics_csv(rec.history, exp.arch));
      rec.model_path = run_dir / "model.json";
      save_model(rec.model, rec.model_path);
      write_text(run_dir / "diagnostics.json",
                 diagnostics_json(rec.model, sample, rec.dead, options.case_directions) + "\n");
      export_diagram(rec.model, rec.dead, run_dir / "diagram.dot");
      if (options.log) {
#pragma omp critical(narrownet_log)
        *options.log << "[suite]   " << exp.name << " run " << rec.run_index
                     << (rec.ok ? "" : " FAILED") << " mse=" << fmt4(rec.final_mse)
                     << " sup=" << fmt4(rec.final_sup) << " dead=" << rec.dead.dead.size()
                     << (rec.constant_network ? " constant" : "") << std::endl;
      }
      er.runs[static_cast<std::size_t>(r)] = std::move(rec);
    }

    std::string runs_csv =
        "run,init_seed,shuffle_seed,status,final_mse,final_sup,dead,first_dead_layer,constant_value,error\n";
    for (const auto& rec : er.runs) {
      std::string err = rec.error;
      std::replace(err.begin(), err.end(), ',', ';');
      runs_csv += std::to_string(rec.run_index) + "," + std::to_string(rec.init_seed) + "," +
                  std::to_string(rec.shuffle_seed) + "," + (rec.ok ? "ok" : "failed") + "," +
                  fmt17(rec.final_mse) + "," + fmt17(rec.final_sup) + "," +
                  std::to_string(rec.dead.dead.size()) + "," +
                  (rec.dead.first_dead_layer ? std::to_string(*rec.dead.first_dead_layer) : "") +
                  "," + (rec.constant_network ? fmt17(rec.constant_value) : "") + "," + err + "\n";
    }
    write_text(exp_dir / "runs.csv", runs_csv);
    manifest["experiments"].push_back(
        experiment_json(exp, config.master_seed, sample_file, sample.size()));
    result.experiments.push_back(std::move(er));
  }
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

Table1Row make_table_row(const std::string& label, const std::vector<double>& finals,
                         std::size_t expected_runs) {
  Table1Row row;
  row.label = label;
  row.runs = finals.size();
  row.expected_runs = expected_runs;
  if (finals.empty()) return row;
  row.min = *std::min_element(finals.begin(), finals.end());
  row.max = *std::max_element(finals.begin(), finals.end());
  CompensatedSum s;
  for (double v : finals) s.add(v);
  row.avg = std::clamp(s.value() / static_cast<double>(finals.size()), row.min, row.max);
  return row;
}

namespace {

json load_manifest(const fs::path& results) {
  const fs::path path = results / "manifest.json";
  if (!fs::exists(path)) throw Error("no manifest.json in " + results.string());
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error("manifest.json: " + std::string(e.what()));
  }
}

struct StoredRun {
  std::size_t run = 0;
  bool ok = false;
  std::vector<EpochMetrics> history;
};

std::vector<StoredRun> load_runs(const fs::path& results, const json& exp) {
  const std::string name = exp.at("name").get<std::string>();
  const std::size_t runs = exp.at("runs").get<std::size_t>();
  const std::size_t epochs = exp.at("train").at("epochs").get<std::size_t>();
  std::map<std::size_t, bool> status;
  const fs::path runs_csv = results / name / "runs.csv";
  if (fs::exists(runs_csv)) {
    std::istringstream in(read_text(runs_csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string run, a, b, st;
      std::getline(row, run, ',');
      std::getline(row, a, ',');
      std::getline(row, b, ',');
      std::getline(row, st, ',');
      if (!run.empty()) status[std::stoul(run)] = st == "ok";
    }
  }
  std::vector<StoredRun> out;
  for (std::size_t r = 0; r < runs; ++r) {
    const fs::path metrics = results / name / run_dir_name(r) / "metrics.csv";
    if (!fs::exists(metrics)) continue;
    StoredRun sr;
    sr.run = r;
    sr.history = parse_metrics_csv(read_text(metrics));
    sr.ok = status.count(r) ? status[r] : true;
    if (sr.history.size() != epochs) sr.ok = false;
    out.push_back(std::move(sr));
  }
  return out;
}

}  // namespace

std::vector<Table1Row> aggregate_table(const fs::path& results) {
  const json manifest = load_manifest(results);
  std::vector<Table1Row> rows;
  for (const auto& exp : manifest.at("experiments")) {
    std::vector<double> finals;
    for (const auto& run : load_runs(results, exp))
      if (run.ok) finals.push_back(run.history.back().sup_estimate);
    rows.push_back(make_table_row(exp.at("name").get<std::string>(), finals,
                                  exp.at("runs").get<std::size_t>()));
  }
  std::string csv = "config,min,avg,max,runs,expected_runs,complete\n";
  for (const auto& r : rows)
    csv += r.label + "," + fmt4(r.min) + "," + fmt4(r.avg) + "," + fmt4(r.max) + "," +
           std::to_string(r.runs) + "," + std::to_string(r.expected_runs) + "," +
           (r.complete() ? "yes" : "INCOMPLETE") + "\n";
  write_text(results / "table1.csv", csv);
  return rows;
}

std::string format_table(const std::vector<Table1Row>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %6s  %6s  %6s  %s\n", static_cast<int>(width), "config",
                "min", "avg", "max", "runs");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %.4f  %.4f  %.4f  %zu/%zu%s\n", static_cast<int>(width),
                  r.label.c_str(), r.min, r.avg, r.max, r.runs, r.expected_runs,
                  r.complete() ? "" : "  (incomplete)");
    out << buf;
  }
  return out.str();
}

FigureSeries figure_series(const std::vector<std::vector<EpochMetrics>>& histories,
                           double mse_reference) {
  if (histories.empty()) throw Error("figure: no completed runs");
  FigureSeries fsr;
  const std::size_t epochs = histories.front().size();
  for (const auto& h : histories)
    if (h.size() != epochs || epochs == 0) throw Error("figure: runs have unequal epoch counts");
  auto final_sup = [&](std::size_t i) { return histories[i].back().sup_estimate; };
  for (std::size_t i = 1; i < histories.size(); ++i) {
    if (final_sup(i) < final_sup(fsr.best_run)) fsr.best_run = i;
    if (final_sup(i) > final_sup(fsr.worst_run)) fsr.worst_run = i;
  }
  for (std::size_t e = 0; e < epochs; ++e) {
    fsr.epoch.push_back(static_cast<double>(histories.front()[e].epoch));
    CompensatedSum mse, sup;
    for (const auto& h : histories) {
      mse.add(h[e].mse);
      sup.add(h[e].sup_estimate);
    }
    const double k = static_cast<double>(histories.size());
    fsr.mse_avg.push_back(mse.value() / k);
    fsr.sup_avg.push_back(sup.value() / k);
    fsr.mse_best.push_back(histories[fsr.best_run][e].mse);
    fsr.mse_worst.push_back(histories[fsr.worst_run][e].mse);
    fsr.sup_best.push_back(histories[fsr.best_run][e].sup_estimate);
    fsr.sup_worst.push_back(histories[fsr.worst_run][e].sup_estimate);
    fsr.mse_ref.push_back(mse_reference);
    fsr.sup_ref.push_back(const_supnorm(constants::kInnerValue));
  }
  return fsr;
}

std::vector<fs::path> emit_figure_data(const fs::path& results, const std::string& id) {
  const json manifest = load_manifest(results);
  std::vector<json> chosen;
  for (const auto& exp : manifest.at("experiments"))
    if (id == "all" || exp.at("name").get<std::string>() == id) chosen.push_back(exp);
  if (chosen.empty()) throw Error("figure: unknown figure id '" + id + "'");

  fs::create_directories(results / "figures");
  std::vector<fs::path> written;
  for (const auto& exp : chosen) {
    const std::string name = exp.at("name").get<std::string>();
    const Sample sample =
        sample_from_file(results / exp.at("sample").at("file").get<std::string>());
    CompensatedSum ref;
    for (double t : sample.targets) ref.add((t - constants::kInnerValue) * (t - constants::kInnerValue));
    const double mse_ref = ref.value() / static_cast<double>(sample.size());

    std::vector<std::vector<EpochMetrics>> histories;
    std::vector<std::size_t> run_ids;
    for (auto& run : load_runs(results, exp))
      if (run.ok) {
        run_ids.push_back(run.run);
        histories.push_back(std::move(run.history));
      }
    if (histories.empty()) throw Error("figure: experiment '" + name + "' has no completed runs");
    const FigureSeries s = figure_series(histories, mse_ref);

    std::string csv =
        "epoch,mse_best,mse_worst,mse_avg,mse_ref,sup_best,sup_worst,sup_avg,sup_ref\n";
    for (std::size_t e = 0; e < s.epoch.size(); ++e)
      csv += std::to_string(static_cast<std::size_t>(s.epoch[e])) + "," + fmt17(s.mse_best[e]) +
             "," + fmt17(s.mse_worst[e]) + "," + fmt17(s.mse_avg[e]) + "," + fmt17(s.mse_ref[e]) +
             "," + fmt17(s.sup_best[e]) + "," + fmt17(s.sup_worst[e]) + "," + fmt17(s.sup_avg[e]) +
             "," + fmt17(s.sup_ref[e]) + "\n";
    const fs::path csv_path = results / "figures" / ("figure_" + name + ".csv");
    write_text(csv_path, csv);
    written.push_back(csv_path);

    const std::string best = "best (run " + std::to_string(run_ids[s.best_run]) + ")";
    const std::string worst = "worst (run " + std::to_string(run_ids[s.worst_run]) + ")";
    write_text(results / "figures" / ("figure_" + name + "_mse.svg"),
               svg::line_plot(name + ": MSE loss", s.epoch,
                              {{best, s.mse_best, "green"},
                               {worst, s.mse_worst, "saddlebrown"},
                               {"average", s.mse_avg, "steelblue"},
                               {"N0 = 1/8", s.mse_ref, "black", true}}));
    write_text(results / "figures" / ("figure_" + name + "_sup.svg"),
               svg::line_plot(name + ": sup-norm error", s.epoch,
                              {{best, s.sup_best, "green"},
                               {worst, s.sup_worst, "saddlebrown"},
                               {"average", s.sup_avg, "steelblue"},
                               {"N0 = 1/8", s.sup_ref, "black", true}}));
  }
  return written;
}

fs::path emit_argmax_plot_data(const fs::path& results, const std::string& experiment, double tol) {
  const json manifest = load_manifest(results);
  const json* exp = nullptr;
  for (const auto& e : manifest.at("experiments"))
    if (e.at("name").get<std::string>() == experiment) exp = &e;
  if (!exp) throw Error("argmax: unknown experiment '" + experiment + "'");
  if (exp->at("n").get<std::size_t>() != 2)
    throw Error("argmax: scatter data requires n = 2, experiment '" + experiment + "' has n = " +
                std::to_string(exp->at("n").get<std::size_t>()));
  const Sample sample = sample_from_file(results / exp->at("sample").at("file").get<std::string>());

  std::string csv = "group,x_1,x_2\n";
  std::size_t groups = 0;
  const std::size_t runs = exp->at("runs").get<std::size_t>();
  for (std::size_t r = 0; r < runs; ++r) {
    const fs::path model = results / experiment / run_dir_name(r) / "model.json";
    if (!fs::exists(model)) continue;
    const ReluNetwork net = load_model(model);
    ++groups;
    for (std::size_t i : argmax_set(net, sample, tol)) {
      const auto p = sample.point(i);
      csv += run_dir_name(r) + "," + fmt17(p[0]) + "," + fmt17(p[1]) + "\n";
    }
  }
  if (groups == 0) throw Error("argmax: no stored models for '" + experiment + "'");
  for (int k = 0; k <= 360; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 360.0;
    csv += "boundary," + fmt17(0.5 + 0.5 * std::cos(t)) + "," + fmt17(0.5 + 0.5 * std::sin(t)) + "\n";
  }
  fs::create_directories(results / "figures");
  const fs::path path = results / "figures" / ("argmax_" + experiment + ".csv");
  write_text(path, csv);
  return path;
}

}  // namespace narrownet

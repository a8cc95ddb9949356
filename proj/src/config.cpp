#include "narrownet/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace narrownet {
namespace toml_lite {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error("config line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

Value parse_value(std::string_view raw, std::size_t line) {
  if (raw.empty()) fail(line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        const char e = raw[++i];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += raw[i];
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  std::string digits;
  for (char c : raw)
    if (c != '_') digits += c;
  const bool looks_float = digits.find_first_of(".eE") != std::string::npos ||
                           digits == "inf" || digits == "nan";
  if (!looks_float) {
    std::int64_t v = 0;
    const char* first = digits.data();
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, digits.data() + digits.size(), v);
    if (ec == std::errc() && p == digits.data() + digits.size()) return v;
  } else {
    double v = 0.0;
    const char* first = digits.data();
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, digits.data() + digits.size(), v);
    if (ec == std::errc() && p == digits.data() + digits.size()) return v;
  }
  fail(line, "cannot parse value '" + std::string(raw) + "'");
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  std::istringstream in(text);
  std::string raw_line;
  std::size_t lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    const auto line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.starts_with("[[")) {
      if (!line.ends_with("]]")) fail(lineno, "malformed array-of-tables header");
      const std::string name(trim(line.substr(2, line.size() - 4)));
      if (!valid_key(name)) fail(lineno, "invalid table name '" + name + "'");
      if (doc.tables.count(name)) fail(lineno, "'" + name + "' already defined as a table");
      doc.arrays[name].emplace_back();
      doc.array_lines[name].push_back(lineno);
      current = &doc.arrays[name].back();
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "malformed table header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(name)) fail(lineno, "invalid table name '" + name + "'");
      if (doc.tables.count(name) || doc.arrays.count(name))
        fail(lineno, "table '" + name + "' defined twice");
      current = &doc.tables[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(lineno, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) fail(lineno, "invalid key '" + key + "'");
    if (current->count(key)) fail(lineno, "duplicate key '" + key + "'");
    (*current)[key] = Entry{parse_value(trim(line.substr(eq + 1)), lineno), lineno};
  }
  return doc;
}

}  // namespace toml_lite

namespace {

using toml_lite::Entry;
using toml_lite::Table;

[[noreturn]] void bad(const Entry& e, const std::string& key, const std::string& expected) {
  throw Error("config line " + std::to_string(e.line) + ": '" + key + "' must be " + expected);
}

std::int64_t as_int(const Entry& e, const std::string& key) {
  if (auto* v = std::get_if<std::int64_t>(&e.value)) return *v;
  bad(e, key, "an integer");
}

std::size_t as_count(const Entry& e, const std::string& key) {
  const auto v = as_int(e, key);
  if (v < 0) bad(e, key, "non-negative");
  return static_cast<std::size_t>(v);
}

double as_real(const Entry& e, const std::string& key) {
  if (auto* v = std::get_if<double>(&e.value)) return *v;
  if (auto* v = std::get_if<std::int64_t>(&e.value)) return static_cast<double>(*v);
  bad(e, key, "a number");
}

std::string as_string(const Entry& e, const std::string& key) {
  if (auto* v = std::get_if<std::string>(&e.value)) return *v;
  bad(e, key, "a string");
}

const std::set<std::string> kExperimentKeys = {
    "name", "n",    "w",     "d",     "sample",  "k",          "count", "sample_seed",
    "runs", "epochs", "optimizer", "lr", "beta1", "beta2", "epsilon", "batch_size"};

void apply_entry(ExperimentConfig& exp, bool& sample_n_set, const std::string& key,
                 const Entry& e) {
  if (!kExperimentKeys.count(key))
    throw Error("config line " + std::to_string(e.line) + ": unknown key '" + key + "'");
  if (key == "name") exp.name = as_string(e, key);
  else if (key == "n") { exp.arch.n = as_count(e, key); sample_n_set = true; }
  else if (key == "w") exp.arch.width = as_count(e, key);
  else if (key == "d") exp.arch.depth = as_count(e, key);
  else if (key == "sample") {
    try {
      exp.sample.method = parse_sample_method(as_string(e, key));
    } catch (const Error& err) {
      throw Error("config line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  else if (key == "k") exp.sample.k = as_count(e, key);
  else if (key == "count") exp.sample.count = as_count(e, key);
  else if (key == "sample_seed") exp.sample.seed = static_cast<std::uint64_t>(as_int(e, key));
  else if (key == "runs") exp.runs = as_count(e, key);
  else if (key == "epochs") exp.train.epochs = as_count(e, key);
  else if (key == "optimizer") {
    try {
      exp.train.optimizer = parse_optimizer(as_string(e, key));
    } catch (const Error& err) {
      throw Error("config line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  else if (key == "lr") exp.train.lr = as_real(e, key);
  else if (key == "beta1") exp.train.beta1 = as_real(e, key);
  else if (key == "beta2") exp.train.beta2 = as_real(e, key);
  else if (key == "epsilon") exp.train.epsilon = as_real(e, key);
  else if (key == "batch_size") exp.train.batch_size = as_count(e, key);
}

}  // namespace

Sample SampleSpec::generate() const {
  switch (method) {
    case SampleMethod::grid: return grid_sample(n, k);
    case SampleMethod::uniform: return uniform_rejection_sample(n, count, seed);
    case SampleMethod::radial: return radial_ball_sample(n, count, seed);
    case SampleMethod::file: break;
  }
  throw Error("SampleSpec: cannot generate a file-backed sample");
}

std::string SampleSpec::key() const {
  std::string out = to_string(method) + "_n" + std::to_string(n);
  if (method == SampleMethod::grid) return out + "_k" + std::to_string(k);
  return out + "_c" + std::to_string(count) + "_s" + std::to_string(seed);
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw Error("experiment: missing name");
  const std::string where = "experiment '" + name + "': ";
  try {
    arch.validate();
    train.validate();
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
  if (runs < 1) throw Error(where + "runs must be >= 1");
  if (sample.n != arch.n) throw Error(where + "sample dimension differs from n");
  if (sample.method == SampleMethod::grid && sample.k < 1) throw Error(where + "k must be >= 1");
  if (sample.method != SampleMethod::grid && sample.count < 1)
    throw Error(where + "count must be >= 1");
}

void SuiteConfig::apply_scale(std::size_t factor) {
  if (factor < 1) throw Error("scale must be >= 1");
  scale *= factor;
  if (factor == 1) return;
  for (auto& exp : experiments) {
    if (exp.sample.method != SampleMethod::grid)
      exp.sample.count = std::max<std::size_t>(1, exp.sample.count / factor);
    exp.train.epochs = std::max<std::size_t>(1, exp.train.epochs / factor);
  }
}

SuiteConfig parse_suite_config(const std::string& text) {
  const auto doc = toml_lite::parse(text);
  SuiteConfig suite;
  for (const auto& [key, e] : doc.root) {
    if (key == "master_seed") suite.master_seed = static_cast<std::uint64_t>(as_int(e, key));
    else if (key == "output") suite.output = as_string(e, key);
    else
      throw Error("config line " + std::to_string(e.line) + ": unknown top-level key '" + key + "'");
  }
  for (const auto& [name, table] : doc.tables)
    if (name != "defaults")
      throw Error("config: unknown table [" + name + "]");
  for (const auto& [name, arr] : doc.arrays)
    if (name != "experiment")
      throw Error("config: unknown array of tables [[" + name + "]]");

  const Table* defaults = nullptr;
  if (auto it = doc.tables.find("defaults"); it != doc.tables.end()) defaults = &it->second;

  auto arr = doc.arrays.find("experiment");
  if (arr == doc.arrays.end() || arr->second.empty())
    throw Error("config: no [[experiment]] blocks");
  std::set<std::string> names;
  for (std::size_t i = 0; i < arr->second.size(); ++i) {
    ExperimentConfig exp;
    exp.arch = {2, 2, 1};
    bool n_set = false;
    if (defaults)
      for (const auto& [key, e] : *defaults) apply_entry(exp, n_set, key, e);
    for (const auto& [key, e] : arr->second[i]) apply_entry(exp, n_set, key, e);
    exp.sample.n = exp.arch.n;
    try {
      exp.validate();
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(doc.array_lines.at("experiment")[i]) + ": " +
                  e.what());
    }
    if (!names.insert(exp.name).second)
      throw Error("config line " + std::to_string(doc.array_lines.at("experiment")[i]) +
                  ": duplicate experiment name '" + exp.name + "'");
    suite.experiments.push_back(std::move(exp));
  }
  return suite;
}

SuiteConfig load_suite_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite_config(buf.str());
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run_index) {
  return master_seed + run_index;
}

std::uint64_t shuffle_seed_for(std::uint64_t seed) { return seed << 20; }

}  // namespace narrownet

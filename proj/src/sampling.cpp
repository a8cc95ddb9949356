#include "narrownet/sampling.hpp"

#include "narrownet/network.hpp"
#include "narrownet/target.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace narrownet {

std::string to_string(SampleMethod method) {
  switch (method) {
    case SampleMethod::grid: return "grid";
    case SampleMethod::uniform: return "uniform";
    case SampleMethod::radial: return "radial";
    case SampleMethod::file: return "file";
  }
  return "unknown";
}

SampleMethod parse_sample_method(const std::string& name) {
  if (name == "grid") return SampleMethod::grid;
  if (name == "uniform" || name == "random") return SampleMethod::uniform;
  if (name == "radial") return SampleMethod::radial;
  throw Error("unknown sample method '" + name + "' (expected grid, uniform or radial)");
}

void Sample::push(std::span<const double> x) {
  coords.insert(coords.end(), x.begin(), x.end());
  targets.push_back(f_eval(x));
}

Sample grid_sample(std::size_t n, std::size_t k, std::uint64_t cap) {
  if (n < 1) throw Error("grid_sample: n must be >= 1");
  if (k < 1) throw Error("grid_sample: k must be >= 1");
  double total = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (total > static_cast<double>(cap))
    throw Error("grid_sample: k^n = " + std::to_string(static_cast<long double>(total)) +
                " lattice points exceeds the cap of " + std::to_string(cap));

  Sample s;
  s.n = n;
  s.method = SampleMethod::grid;
  s.param = k;
  const BallDomain domain(n);
  const double step = k > 1 ? 1.0 / static_cast<double>(k - 1) : 0.0;

  // Odometer over the lattice; the last coordinate varies fastest.
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n, 0.0);
  for (;;) {
    for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<double>(idx[j]) * step;
    if (in_ball(x, domain)) s.push(x);
    std::size_t j = n;
    while (j > 0) {
      --j;
      if (++idx[j] < k) break;
      idx[j] = 0;
      if (j == 0) return s;
    }
  }
}

Sample uniform_rejection_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n < 1) throw Error("uniform_rejection_sample: n must be >= 1");
  if (count < 1) throw Error("uniform_rejection_sample: count must be >= 1");
  Sample s;
  s.n = n;
  s.method = SampleMethod::uniform;
  s.param = count;
  s.seed = seed;
  s.coords.reserve(n * count);
  s.targets.reserve(count);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const BallDomain domain(n);
  std::vector<double> x(n);
  while (s.size() < count) {
    for (auto& v : x) v = unit(rng);
    ++s.proposals;
    if (in_ball(x, domain)) s.push(x);
  }
  return s;
}

Sample radial_ball_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n < 1) throw Error("radial_ball_sample: n must be >= 1");
  if (count < 1) throw Error("radial_ball_sample: count must be >= 1");
  Sample s;
  s.n = n;
  s.method = SampleMethod::radial;
  s.param = count;
  s.seed = seed;
  s.coords.reserve(n * count);
  s.targets.reserve(count);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n);
  while (s.size() < count) {
    double norm2 = 0.0;
    for (auto& v : x) {
      v = normal(rng);
      norm2 += v * v;
    }
    if (norm2 == 0.0) continue;
    const double radius = 0.5 * std::pow(unit(rng), inv_n);
    const double scale = radius / std::sqrt(norm2);
    for (auto& v : x) v = 0.5 + v * scale;
    // Rounding in the shift can leave a point a few ulps outside the closed ball.
    if (f_eval(x) > 0.25) continue;
    s.push(x);
  }
  return s;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

double parse_number(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw Error("sample CSV line " + std::to_string(line) + ": malformed number '" +
                std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string sample_to_csv(const Sample& sample) {
  std::string out;
  for (std::size_t j = 0; j < sample.n; ++j) out += "x_" + std::to_string(j + 1) + ",";
  out += "f\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (double v : sample.point(i)) {
      append_number(out, v);
      out += ',';
    }
    append_number(out, sample.targets[i]);
    out += '\n';
  }
  return out;
}

Sample sample_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("sample CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "f")
    throw Error("sample CSV: header must be x_1,...,x_n,f");
  Sample s;
  s.n = header.size() - 1;
  for (std::size_t j = 0; j < s.n; ++j)
    if (header[j] != "x_" + std::to_string(j + 1))
      throw Error("sample CSV: unexpected header column '" + std::string(header[j]) + "'");

  const BallDomain domain(s.n);
  std::vector<double> x(s.n);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != s.n + 1)
      throw Error("sample CSV line " + std::to_string(lineno) + ": expected " +
                  std::to_string(s.n + 1) + " columns, found " + std::to_string(fields.size()));
    for (std::size_t j = 0; j < s.n; ++j) x[j] = parse_number(fields[j], lineno);
    const double target = parse_number(fields[s.n], lineno);
    if (!in_ball(x, domain))
      throw Error("sample CSV line " + std::to_string(lineno) + ": point lies outside K");
    if (std::abs(target - f_eval(x)) > 1e-12)
      throw Error("sample CSV line " + std::to_string(lineno) + ": f column does not match f(x)");
    s.coords.insert(s.coords.end(), x.begin(), x.end());
    s.targets.push_back(target);
  }
  s.method = SampleMethod::file;
  s.param = s.size();
  return s;
}

void sample_to_file(const Sample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("sample: cannot write " + path.string());
  out << sample_to_csv(sample);
  if (!out) throw Error("sample: write failed for " + path.string());
}

Sample sample_from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("sample: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sample_from_csv(buf.str());
}

}  // namespace narrownet

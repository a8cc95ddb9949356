#include "narrownet/diagnostics.hpp"

#include "narrownet/kernels.hpp"
#include "narrownet/target.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace narrownet {

std::string to_string(NeuronState state) {
  switch (state) {
    case NeuronState::dead: return "dead";
    case NeuronState::partial: return "partial";
    case NeuronState::alive: return "alive";
  }
  return "unknown";
}

NeuronState DeadReport::state(std::size_t layer, std::size_t neuron) const {
  const double f = fraction(layer, neuron);
  if (f == 1.0) return NeuronState::dead;
  if (f == 0.0) return NeuronState::alive;
  return NeuronState::partial;
}

std::size_t DeadReport::near_dead_count(double soft) const {
  return static_cast<std::size_t>(
      std::count_if(zero_fractions.begin(), zero_fractions.end(), [&](double f) { return f >= soft; }));
}

std::vector<double> zero_fractions(const ReluNetwork& net, const Sample& sample) {
  if (sample.empty()) throw Error("zero_fractions: empty sample");
  return evaluate_sample(net, sample).zero_fractions();
}

DeadReport classify_dead(const ArchSpec& arch, const std::vector<double>& fractions) {
  if (fractions.size() != arch.hidden_neurons())
    throw Error("classify_dead: expected " + std::to_string(arch.hidden_neurons()) +
                " zero fractions, got " + std::to_string(fractions.size()));
  DeadReport r;
  r.width = arch.width;
  r.depth = arch.depth;
  r.zero_fractions = fractions;
  r.layer_all_dead.assign(arch.depth, true);
  for (std::size_t l = 1; l <= arch.depth; ++l) {
    for (std::size_t j = 0; j < arch.width; ++j) {
      const double f = r.fraction(l, j);
      if (f == 1.0)
        r.dead.push_back({l, j});
      else
        r.layer_all_dead[l - 1] = false;
      if (f == 0.0) r.fully_alive.push_back({l, j});
    }
    if (r.layer_all_dead[l - 1] && !r.first_dead_layer) r.first_dead_layer = l;
  }
  return r;
}

DeadReport classify_dead(const ReluNetwork& net, const Sample& sample) {
  return classify_dead(net.arch, zero_fractions(net, sample));
}

DownstreamCheck constant_downstream_check(const ReluNetwork& net, const Sample& sample,
                                          const DeadReport& report) {
  DownstreamCheck out;
  if (!report.first_dead_layer) return out;
  out.has_dead_layer = true;

  // A dead layer emits the zero vector on every sample point; push it through the rest.
  std::vector<double> h(net.arch.width, 0.0);
  for (std::size_t l = *report.first_dead_layer; l < net.layers.size(); ++l) {
    std::vector<double> next = net.layers[l](h);
    if (l + 1 < net.layers.size())
      for (auto& v : next) v = std::max(v, 0.0);
    h = std::move(next);
  }
  out.constant = h[0];

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  ForwardWorkspace ws(net.arch);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double y = ws.run(net, sample.point(i));
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  out.spread = sample.empty() ? 0.0 : hi - lo;
  out.constant_on_sample = out.spread < 1e-12 && (sample.empty() || std::abs(lo - out.constant) < 1e-12);
  if (!out.constant_on_sample) {
    std::ostringstream msg;
    msg << "layer " << *report.first_dead_layer << " is all-dead but forward varies by "
        << out.spread << " on the sample (propagated constant " << out.constant << ")";
    out.diagnostic = msg.str();
  }
  return out;
}

bool s_n_membership(const ReluNetwork& net, std::span<const double> x) {
  if (x.size() != net.arch.n) throw Error("s_n_membership: dimension mismatch");
  ForwardWorkspace ws(net.arch);
  ws.run(net, x);
  for (std::size_t l = 0; l < net.arch.depth; ++l)
    for (double v : ws.pre(l))
      if (!(v > 0.0)) return false;
  return true;
}

std::vector<std::vector<double>> inner_sphere_points(std::size_t n, std::size_t count,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  std::vector<double> g(n);
  while (pts.size() < count) {
    double norm2 = 0.0;
    for (auto& v : g) {
      v = normal(rng);
      norm2 += v * v;
    }
    if (norm2 == 0.0) continue;
    const double s = constants::kInnerRadius / std::sqrt(norm2);
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = 0.5 + g[j] * s;
    pts.push_back(std::move(x));
  }
  return pts;
}

CaseReport case_classify(const ReluNetwork& net, std::size_t directions, std::uint64_t seed) {
  if (directions < 1) throw Error("case_classify: directions must be >= 1");
  CaseReport rep;
  ForwardWorkspace ws(net.arch);
  const auto pts = inner_sphere_points(net.arch.n, directions, seed);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ++rep.directions_tested;
    ws.run(net, pts[i]);
    for (std::size_t l = 0; l < net.arch.depth; ++l) {
      const auto pre = ws.pre(l);
      for (std::size_t j = 0; j < pre.size(); ++j) {
        if (!(pre[j] > 0.0)) {
          rep.which = ProofCase::case2;
          rep.witness = pts[i];
          rep.witness_direction = i;
          rep.failing_neuron = {l + 1, j};
          return rep;
        }
      }
    }
  }
  return rep;
}

double supnorm_estimate(const ReluNetwork& net, const Sample& sample) {
  if (sample.empty()) throw Error("supnorm_estimate: empty sample");
  return evaluate_sample(net, sample).sup;
}

std::vector<std::size_t> argmax_set(const ReluNetwork& net, const Sample& sample, double tol) {
  if (tol < 0.0) throw Error("argmax_set: tolerance must be >= 0");
  if (sample.empty()) return {};
  std::vector<double> err(sample.size());
  ForwardWorkspace ws(net.arch);
  double sup = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    err[i] = std::abs(sample.targets[i] - ws.run(net, sample.point(i)));
    sup = std::max(sup, err[i]);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < err.size(); ++i)
    if (err[i] >= sup - tol) out.push_back(i);
  return out;
}

BoundVerdict bound_check(const ReluNetwork& net, const ArchSpec& arch, const Sample& sample) {
  BoundVerdict v;
  v.sup_estimate = supnorm_estimate(net, sample);
  v.eta = constants::kEta;
  v.width_applicable = arch.width <= arch.n;
  v.passed = v.sup_estimate >= v.eta - 1e-6;
  return v;
}

namespace {

std::string fmt_double(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string diagram_dot(const ReluNetwork& net, const DeadReport& report) {
  const bool show_params = net.parameter_count() <= 64;
  std::ostringstream out;
  out << "digraph narrownet {\n"
      << "  rankdir=LR;\n"
      << "  node [shape=circle, style=filled, fontsize=10];\n";
  out << "  subgraph layer_0 {\n    rank=same;\n";
  for (std::size_t j = 0; j < net.arch.n; ++j)
    out << "    in_" << j << " [label=\"x" << j + 1 << "\", fillcolor=white, shape=box];\n";
  out << "  }\n";
  for (std::size_t l = 1; l <= net.arch.depth; ++l) {
    out << "  subgraph layer_" << l << " {\n    rank=same;\n";
    for (std::size_t j = 0; j < net.arch.width; ++j) {
      const auto st = report.state(l, j);
      const char* color = st == NeuronState::dead ? "gray60" : (st == NeuronState::partial ? "gray90" : "white");
      out << "    h_" << l << "_" << j << " [label=\""
          << fmt_double(100.0 * report.fraction(l, j), "%.1f") << "%";
      if (show_params) out << "\\nb=" << fmt_double(net.layers[l - 1].bias[j], "%.4g");
      out << "\", fillcolor=" << color << ", state=" << to_string(st)
          << ", zero_fraction=" << fmt_double(report.fraction(l, j), "%.17g") << "];\n";
    }
    out << "  }\n";
  }
  out << "  out [label=\"N";
  if (show_params) out << "\\nb=" << fmt_double(net.layers.back().bias[0], "%.4g");
  out << "\", fillcolor=white, shape=doublecircle];\n";

  auto node = [&](std::size_t layer, std::size_t j) {
    if (layer == 0) return "in_" + std::to_string(j);
    return "h_" + std::to_string(layer) + "_" + std::to_string(j);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& A = net.layers[l];
    for (std::size_t r = 0; r < A.rows; ++r)
      for (std::size_t c = 0; c < A.cols; ++c) {
        const std::string to = (l + 1 == net.layers.size()) ? "out" : node(l + 1, r);
        out << "  " << node(l, c) << " -> " << to;
        if (show_params) out << " [label=\"" << fmt_double(A.w(r, c), "%.4g") << "\"]";
        out << ";\n";
      }
  }
  out << "}\n";
  return out.str();
}

void export_diagram(const ReluNetwork& net, const DeadReport& report,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("export_diagram: cannot write " + path.string());
  out << diagram_dot(net, report);
  if (!out) throw Error("export_diagram: write failed for " + path.string());
}

AffineCollapseCheck check_affine_collapse(const ReluNetwork& net, std::size_t probes,
                                          std::uint64_t seed) {
  AffineCollapseCheck out;
  const AffineMap collapsed = collapse_affine(net);
  const Sample pts = radial_ball_sample(net.arch.n, probes, seed);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto x = pts.point(i);
    if (!s_n_membership(net, x)) continue;
    ++out.members;
    const double diff = std::abs(forward(net, x) - collapsed(x)[0]);
    out.max_error = std::max(out.max_error, diff);
  }
  return out;
}

ConvexityCheck check_convexity(const ReluNetwork& net, const Sample& sample, std::size_t pairs,
                               std::uint64_t seed) {
  ConvexityCheck out;
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < sample.size(); ++i)
    if (s_n_membership(net, sample.point(i))) members.push_back(i);
  out.members = members.size();
  if (members.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  std::vector<double> mid(net.arch.n);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto a = sample.point(members[pick(rng)]);
    const auto b = sample.point(members[pick(rng)]);
    for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = 0.5 * (a[j] + b[j]);
    ++out.pairs;
    if (!s_n_membership(net, mid)) ++out.violations;
  }
  return out;
}

std::string diagnostics_json(const ReluNetwork& net, const Sample& sample,
                             const DeadReport& report, std::size_t directions,
                             std::uint64_t seed) {
  using nlohmann::json;
  const SampleEval ev = evaluate_sample(net, sample);
  const auto verdict = bound_check(net, net.arch, sample);
  const auto downstream = constant_downstream_check(net, sample, report);
  const auto cases = case_classify(net, directions, seed);

  json doc;
  doc["arch"] = {{"n", net.arch.n}, {"w", net.arch.width}, {"d", net.arch.depth}};
  doc["mse"] = ev.mse;
  doc["sup_estimate"] = ev.sup;
  doc["argmax_index"] = ev.argmax;
  doc["zero_fractions"] = report.zero_fractions;
  json dead = json::array();
  for (const auto& id : report.dead) dead.push_back({id.layer, id.neuron});
  doc["dead"] = dead;
  doc["dead_count"] = report.dead.size();
  doc["fully_alive_count"] = report.fully_alive.size();
  doc["near_dead_count"] = report.near_dead_count();
  doc["dichotomy"] = report.dichotomy();
  doc["layer_all_dead"] = report.layer_all_dead;
  doc["first_dead_layer"] = report.first_dead_layer ? json(*report.first_dead_layer) : json(nullptr);
  doc["constant_network"] = downstream.has_dead_layer;
  if (downstream.has_dead_layer) {
    doc["constant_value"] = downstream.constant;
    doc["constant_on_sample"] = downstream.constant_on_sample;
  }
  doc["case"] = cases.which == ProofCase::case1 ? "case1" : "case2";
  doc["case_directions"] = cases.directions_tested;
  if (cases.witness) {
    doc["case_witness"] = *cases.witness;
    doc["case_failing_neuron"] = {cases.failing_neuron.layer, cases.failing_neuron.neuron};
  }
  doc["bound"] = {{"sup_estimate", verdict.sup_estimate},
                  {"eta", verdict.eta},
                  {"passed", verdict.passed},
                  {"width_applicable", verdict.width_applicable}};
  return doc.dump(2);
}

}  // namespace narrownet

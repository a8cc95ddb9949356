#include "narrownet/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace narrownet {

using json = nlohmann::json;

void ArchSpec::validate() const {
  if (n < 1) throw Error("ArchSpec: input dimension n must be >= 1");
  if (width < 1) throw Error("ArchSpec: hidden width w must be >= 1");
}

void AffineMap::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = weights.data() + r * cols;
    double acc = bias[r];
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

std::vector<double> AffineMap::operator()(std::span<const double> in) const {
  if (in.size() != cols)
    throw Error("AffineMap: input has dimension " + std::to_string(in.size()) + ", expected " +
                std::to_string(cols));
  std::vector<double> out(rows);
  apply(in, out);
  return out;
}

ReluNetwork::ReluNetwork(const ArchSpec& spec) : arch(spec) {
  arch.validate();
  layers.reserve(arch.num_affine());
  for (std::size_t i = 0; i < arch.num_affine(); ++i) {
    const std::size_t in = (i == 0) ? arch.n : arch.width;
    const std::size_t out = (i == arch.depth) ? 1 : arch.width;
    layers.emplace_back(out, in);
  }
}

void ReluNetwork::validate() const {
  arch.validate();
  if (layers.size() != arch.num_affine())
    throw Error("network: arch depth " + std::to_string(arch.depth) + " requires " +
                std::to_string(arch.num_affine()) + " layers, found " +
                std::to_string(layers.size()));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    const std::size_t in = (i == 0) ? arch.n : arch.width;
    const std::size_t out = (i == arch.depth) ? 1 : arch.width;
    const std::string where = "network: layer " + std::to_string(i + 1);
    if (layer.rows != out || layer.cols != in)
      throw Error(where + " has shape " + std::to_string(layer.rows) + "x" +
                  std::to_string(layer.cols) + ", expected " + std::to_string(out) + "x" +
                  std::to_string(in));
    if (layer.weights.size() != layer.rows * layer.cols)
      throw Error(where + " weight storage does not match its shape");
    if (layer.bias.size() != layer.rows)
      throw Error(where + " bias length " + std::to_string(layer.bias.size()) +
                  " differs from weight rows " + std::to_string(layer.rows));
  }
}

std::size_t ReluNetwork::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.parameter_count();
  return total;
}

bool ActivationTrace::all_active() const {
  for (const auto& layer : pattern)
    if (!std::all_of(layer.begin(), layer.end(), [](bool b) { return b; })) return false;
  return true;
}

ReluNetwork init_network(const ArchSpec& arch, std::uint64_t seed) {
  ReluNetwork net(arch);
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.cols + layer.rows));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : layer.weights) v = dist(rng);
  }
  return net;
}

namespace {

void check_input(const ReluNetwork& net, std::span<const double> x) {
  if (x.size() != net.arch.n)
    throw Error("forward: input has dimension " + std::to_string(x.size()) + ", network expects " +
                std::to_string(net.arch.n));
}

}  // namespace

ForwardWorkspace::ForwardWorkspace(const ArchSpec& arch)
    : width_(arch.width),
      depth_(arch.depth),
      pre_(arch.width * arch.depth),
      post_(arch.width * arch.depth) {}

double ForwardWorkspace::run(const ReluNetwork& net, std::span<const double> x) {
  std::span<const double> in = x;
  for (std::size_t l = 0; l < depth_; ++l) {
    std::span<double> pre(pre_.data() + l * width_, width_);
    std::span<double> post(post_.data() + l * width_, width_);
    net.layers[l].apply(in, pre);
    for (std::size_t j = 0; j < width_; ++j) post[j] = pre[j] > 0.0 ? pre[j] : 0.0;
    in = post;
  }
  double out = 0.0;
  net.layers[depth_].apply(in, std::span<double>(&out, 1));
  return out;
}

std::span<const double> ForwardWorkspace::pre(std::size_t layer) const {
  return {pre_.data() + layer * width_, width_};
}

std::span<const double> ForwardWorkspace::post(std::size_t layer) const {
  return {post_.data() + layer * width_, width_};
}

double forward(const ReluNetwork& net, std::span<const double> x) {
  check_input(net, x);
  ForwardWorkspace ws(net.arch);
  return ws.run(net, x);
}

ActivationTrace forward_trace(const ReluNetwork& net, std::span<const double> x) {
  check_input(net, x);
  ForwardWorkspace ws(net.arch);
  ActivationTrace trace;
  trace.output = ws.run(net, x);
  for (std::size_t l = 0; l < net.arch.depth; ++l) {
    auto pre = ws.pre(l);
    auto post = ws.post(l);
    trace.pre.emplace_back(pre.begin(), pre.end());
    trace.post.emplace_back(post.begin(), post.end());
    std::vector<bool> pattern(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) pattern[j] = pre[j] > 0.0;
    trace.pattern.push_back(std::move(pattern));
  }
  return trace;
}

AffineMap collapse_affine(const ReluNetwork& net) {
  AffineMap acc = net.layers.front();
  for (std::size_t i = 1; i < net.layers.size(); ++i) {
    const AffineMap& next = net.layers[i];
    AffineMap composed(next.rows, acc.cols);
    for (std::size_t r = 0; r < next.rows; ++r) {
      double b = next.bias[r];
      for (std::size_t k = 0; k < next.cols; ++k) b += next.w(r, k) * acc.bias[k];
      composed.bias[r] = b;
      for (std::size_t c = 0; c < acc.cols; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < next.cols; ++k) s += next.w(r, k) * acc.w(k, c);
        composed.w(r, c) = s;
      }
    }
    acc = std::move(composed);
  }
  return acc;
}

std::string model_to_json(const ReluNetwork& net) {
  json doc;
  doc["arch"] = {{"n", net.arch.n}, {"w", net.arch.width}, {"d", net.arch.depth}};
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json rows = json::array();
    for (std::size_t r = 0; r < layer.rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < layer.cols; ++c) row.push_back(layer.w(r, c));
      rows.push_back(std::move(row));
    }
    layers.push_back({{"weights", std::move(rows)}, {"bias", layer.bias}});
  }
  doc["layers"] = std::move(layers);
  // nlohmann emits the shortest representation that round-trips exactly.
  return doc.dump(1);
}

ReluNetwork model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("model: malformed JSON: ") + e.what());
  }
  try {
    ReluNetwork net;
    const auto& arch = doc.at("arch");
    net.arch.n = arch.at("n").get<std::size_t>();
    net.arch.width = arch.at("w").get<std::size_t>();
    net.arch.depth = arch.at("d").get<std::size_t>();
    std::size_t index = 0;
    for (const auto& entry : doc.at("layers")) {
      ++index;
      AffineMap layer;
      const auto& rows = entry.at("weights");
      layer.rows = rows.size();
      layer.cols = layer.rows ? rows.at(0).size() : 0;
      for (const auto& row : rows) {
        if (row.size() != layer.cols)
          throw Error("model: layer " + std::to_string(index) + " has ragged weight rows");
        for (const auto& v : row) layer.weights.push_back(v.get<double>());
      }
      layer.bias = entry.at("bias").get<std::vector<double>>();
      net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
  } catch (const json::exception& e) {
    throw Error(std::string("model: ") + e.what());
  }
}

void save_model(const ReluNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("model: cannot write " + path.string());
  out << model_to_json(net) << '\n';
  if (!out) throw Error("model: write failed for " + path.string());
}

ReluNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("model: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace narrownet

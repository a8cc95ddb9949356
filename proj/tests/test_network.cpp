#include "narrownet/diagnostics.hpp"
#include "narrownet/network.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace narrownet;

namespace {

// N(x) = ReLU(-0.92 x_1 + 0.12) + 0.12, arch (n=2, w=1, d=1).
ReluNetwork figure2_network() {
  ReluNetwork net({2, 1, 1});
  net.layers[0].w(0, 0) = -0.92;
  net.layers[0].w(0, 1) = 0.0;
  net.layers[0].bias[0] = 0.12;
  net.layers[1].w(0, 0) = 1.0;
  net.layers[1].bias[0] = 0.12;
  return net;
}

ReluNetwork random_network(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 5), depth(0, 6);
  ArchSpec arch{dim(rng), dim(rng), depth(rng)};
  ReluNetwork net = init_network(arch, rng());
  // Positive biases keep a healthy share of points inside S_N.
  std::uniform_real_distribution<double> b(0.0, 1.0);
  for (auto& layer : net.layers)
    for (auto& v : layer.bias) v = b(rng);
  return net;
}

std::vector<double> random_point(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace

TEST_CASE("init_network shapes, Glorot bound and determinism") {
  const ReluNetwork net = init_network({2, 2, 1}, 42);
  REQUIRE(net.layers.size() == 2);
  CHECK(net.layers[0].rows == 2);
  CHECK(net.layers[0].cols == 2);
  CHECK(net.layers[1].rows == 1);
  CHECK(net.layers[1].cols == 2);
  CHECK(net.layers[0].bias == std::vector<double>{0.0, 0.0});
  CHECK(net.layers[1].bias == std::vector<double>{0.0});

  const double limit = std::sqrt(6.0 / 4.0);
  CHECK(limit == doctest::Approx(1.2247).epsilon(1e-4));
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    for (double w : init_network({2, 2, 1}, seed).layers[0].weights) {
      CHECK(w >= -limit);
      CHECK(w <= limit);
    }

  CHECK(init_network({5, 6, 20}, 9) == init_network({5, 6, 20}, 9));
  CHECK_FALSE(init_network({5, 6, 20}, 9) == init_network({5, 6, 20}, 10));
}

TEST_CASE("depth 0 is a single affine map and arch validation") {
  const ReluNetwork net({3, 4, 0});
  REQUIRE(net.layers.size() == 1);
  CHECK(net.layers[0].rows == 1);
  CHECK(net.layers[0].cols == 3);
  CHECK_THROWS_AS(ReluNetwork(ArchSpec{0, 1, 1}), Error);
  CHECK_THROWS_AS(ReluNetwork(ArchSpec{1, 0, 1}), Error);
}

TEST_CASE("forward on the zero network and the single-ReLU network") {
  const ReluNetwork zero({2, 3, 4});
  CHECK(forward(zero, std::vector<double>{0.3, -7.0}) == 0.0);

  const ReluNetwork fig2 = figure2_network();
  CHECK(forward(fig2, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(forward(fig2, std::vector<double>{0.0, 0.5}) == doctest::Approx(0.24).epsilon(1e-15));
  CHECK_THROWS_AS(forward(fig2, std::vector<double>{0.5}), Error);
}

TEST_CASE("forward_trace patterns") {
  const ReluNetwork fig2 = figure2_network();
  auto t = forward_trace(fig2, std::vector<double>{0.5, 0.5});
  CHECK(t.pre[0][0] == doctest::Approx(-0.34));
  CHECK(t.post[0][0] == 0.0);
  CHECK(t.pattern[0] == std::vector<bool>{false});
  CHECK(t.output == forward(fig2, std::vector<double>{0.5, 0.5}));

  t = forward_trace(fig2, std::vector<double>{0.0, 0.5});
  CHECK(t.pre[0][0] == doctest::Approx(0.12));
  CHECK(t.pattern[0] == std::vector<bool>{true});

  ReluNetwork up({3, 2, 3});
  for (std::size_t l = 0; l < 3; ++l)
    for (auto& b : up.layers[l].bias) b = 1.0;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) CHECK(forward_trace(up, random_point(rng, 3)).all_active());
}

TEST_CASE("trace invariants hold on random networks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const ReluNetwork net = random_network(rng);
    const auto x = random_point(rng, net.arch.n);
    const auto t = forward_trace(net, x);
    CHECK(t.output == forward(net, x));
    for (std::size_t l = 0; l < t.pre.size(); ++l)
      for (std::size_t j = 0; j < t.pre[l].size(); ++j) {
        CHECK(t.post[l][j] == std::max(0.0, t.pre[l][j]));
        CHECK(t.pattern[l][j] == (t.pre[l][j] > 0.0));
        CHECK(std::max(0.0, t.post[l][j]) == t.post[l][j]);
      }
  }
}

TEST_CASE("collapse_affine") {
  SUBCASE("depth 0 is itself") {
    const ReluNetwork net = init_network({3, 2, 0}, 3);
    CHECK(collapse_affine(net) == net.layers[0]);
  }
  SUBCASE("two scalar maps compose") {
    ReluNetwork net({1, 1, 1});
    net.layers[0].w(0, 0) = 3.0;
    net.layers[0].bias[0] = 4.0;
    net.layers[1].w(0, 0) = 2.0;
    net.layers[1].bias[0] = 1.0;
    const AffineMap c = collapse_affine(net);
    CHECK(c.w(0, 0) == 6.0);
    CHECK(c.bias[0] == 9.0);
  }
  SUBCASE("agrees with forward wherever every neuron is active") {
    std::mt19937_64 rng(2024);
    std::size_t members = 0;
    for (int trial = 0; trial < 5000 && members < 1000; ++trial) {
      const ReluNetwork net = random_network(rng);
      const auto x = random_point(rng, net.arch.n);
      if (!s_n_membership(net, x)) continue;
      ++members;
      CHECK(std::abs(collapse_affine(net)(x)[0] - forward(net, x)) < 1e-12);
    }
    CHECK(members >= 1000);
  }
}

TEST_CASE("forward is affine between points sharing an activation pattern") {
  std::mt19937_64 rng(77);
  std::size_t checked = 0;
  for (int trial = 0; trial < 20000 && checked < 500; ++trial) {
    const ReluNetwork net = random_network(rng);
    const auto x = random_point(rng, net.arch.n);
    auto y = x;
    std::normal_distribution<double> step(0.0, 0.05);
    for (auto& v : y) v += step(rng);
    std::vector<double> mid(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) mid[j] = 0.5 * (x[j] + y[j]);
    const auto px = forward_trace(net, x).pattern;
    if (px != forward_trace(net, y).pattern || px != forward_trace(net, mid).pattern) continue;
    ++checked;
    CHECK(std::abs(forward(net, mid) - 0.5 * (forward(net, x) + forward(net, y))) < 1e-9);
  }
  CHECK(checked >= 500);
}

TEST_CASE("model JSON round trip is bit-exact") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 25; ++i) {
    const ReluNetwork net = random_network(rng);
    CHECK(model_from_json(model_to_json(net)) == net);
  }
  const auto path = std::filesystem::temp_directory_path() / "narrownet_model_roundtrip.json";
  const ReluNetwork net = init_network({5, 6, 20}, 1);
  save_model(net, path);
  CHECK(load_model(path) == net);
  std::filesystem::remove(path);
}

TEST_CASE("model loading rejects inconsistent files") {
  const std::string bad_bias = R"({"arch":{"n":2,"w":2,"d":1},"layers":[
      {"weights":[[1,2],[3,4]],"bias":[0]},
      {"weights":[[1,1]],"bias":[0]}]})";
  CHECK_THROWS_WITH_AS(model_from_json(bad_bias), doctest::Contains("layer 1"), Error);

  const std::string extra_layer = R"({"arch":{"n":2,"w":2,"d":1},"layers":[
      {"weights":[[1,2],[3,4]],"bias":[0,0]},
      {"weights":[[1,1],[1,1]],"bias":[0,0]},
      {"weights":[[1,1]],"bias":[0]}]})";
  CHECK_THROWS_AS(model_from_json(extra_layer), Error);

  CHECK_THROWS_AS(model_from_json("{not json"), Error);
  CHECK_THROWS_AS(model_from_json(R"({"arch":{"n":2}})"), Error);
}

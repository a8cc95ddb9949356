#include "narrownet/diagnostics.hpp"
#include "narrownet/optim.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace narrownet;

namespace {

// Scalar "network": single affine map R^1 -> R with one weight and one bias.
ReluNetwork scalar_net(double w, double b) {
  ReluNetwork net({1, 1, 0});
  net.layers[0].weights = {w};
  net.layers[0].bias = {b};
  return net;
}

GradientSet scalar_grad(const ReluNetwork& net, double gw, double gb) {
  GradientSet g(net);
  g.layers[0].weights = {gw};
  g.layers[0].bias = {gb};
  return g;
}

}  // namespace

TEST_CASE("adam_step") {
  TrainConfig cfg;
  SUBCASE("zero gradient leaves parameters unchanged") {
    ReluNetwork net = scalar_net(0.3, -0.2);
    AdamState st(net, cfg);
    adam_step(st, net, scalar_grad(net, 0.0, 0.0));
    CHECK(net == scalar_net(0.3, -0.2));
    CHECK(st.t == 1);
  }
  SUBCASE("first step moves by about lr against the gradient sign") {
    for (double g : {1e-3, -0.01, 0.5, -3.0, 40.0}) {
      ReluNetwork net = scalar_net(1.0, 1.0);
      AdamState st(net, cfg);
      adam_step(st, net, scalar_grad(net, g, -g));
      const double step = net.layers[0].weights[0] - 1.0;
      CHECK(std::abs(step + cfg.lr * (g > 0 ? 1 : -1)) < 1e-3 * cfg.lr);
      // Closed form with m_hat = g, v_hat = g^2.
      CHECK(step == doctest::Approx(-cfg.lr * g / (std::abs(g) + cfg.epsilon)).epsilon(1e-12));
      CHECK(net.layers[0].bias[0] - 1.0 == doctest::Approx(-step).epsilon(1e-12));
    }
  }
  SUBCASE("constant gradient converges to lr-sized steps") {
    ReluNetwork net = scalar_net(0.0, 0.0);
    AdamState st(net, cfg);
    double last = 0.0, prev = 0.0;
    for (int i = 0; i < 5000; ++i) {
      prev = net.layers[0].weights[0];
      adam_step(st, net, scalar_grad(net, 0.7, 0.0));
      last = net.layers[0].weights[0];
    }
    CHECK(last - prev == doctest::Approx(-cfg.lr).epsilon(1e-6));
  }
  SUBCASE("shape mismatch") {
    ReluNetwork net = scalar_net(0.0, 0.0);
    AdamState st(net, cfg);
    const ReluNetwork other({2, 1, 0});
    CHECK_THROWS_AS(adam_step(st, net, GradientSet(other)), Error);
  }
}

TEST_CASE("sgd_step") {
  ReluNetwork net = scalar_net(1.0, 1.0);
  sgd_step(net, scalar_grad(net, 0.0, 0.0), 0.1);
  CHECK(net == scalar_net(1.0, 1.0));
  sgd_step(net, scalar_grad(net, 2.0, -2.0), 0.1);
  CHECK(net.layers[0].weights[0] == doctest::Approx(0.8));
  CHECK(net.layers[0].bias[0] == doctest::Approx(1.2));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  TrainConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const double gw = g(rng), gb = g(rng);
    ReluNetwork a = scalar_net(0.0, 0.0), b = scalar_net(0.0, 0.0);
    AdamState st(a, cfg);
    adam_step(st, a, scalar_grad(a, gw, gb));
    sgd_step(b, scalar_grad(b, gw, gb), 0.01);
    CHECK(std::signbit(a.layers[0].weights[0]) == std::signbit(b.layers[0].weights[0]));
    CHECK(std::signbit(a.layers[0].bias[0]) == std::signbit(b.layers[0].bias[0]));
  }
}

TEST_CASE("SGD on a dead network only moves the final bias") {
  ReluNetwork net = init_network({2, 2, 2}, 3);
  for (auto& b : net.layers[0].bias) b = -4.0;
  const Sample s = grid_sample(2, 30);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.lr = 0.01;
  cfg.epochs = 4;
  const auto result = train(net, s, cfg);
  CHECK(result.net.layers[0] == net.layers[0]);
  CHECK(result.net.layers[1] == net.layers[1]);
  CHECK(result.net.layers[2].weights == net.layers[2].weights);
  CHECK(result.net.layers[2].bias != net.layers[2].bias);
  for (const auto& m : result.history)
    for (std::size_t j = 0; j < 2; ++j) CHECK(m.zero_fractions[j] == 1.0);
}

TEST_CASE("training is deterministic and records every epoch") {
  const Sample s = grid_sample(2, 40);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.shuffle_seed = 1 << 20;
  const ReluNetwork net = init_network({2, 2, 2}, 1);
  std::size_t hook_calls = 0;
  const auto a = train(net, s, cfg, [&](const EpochMetrics& m, const ReluNetwork&) {
    ++hook_calls;
    CHECK(m.sup_estimate >= 0.0);
    for (double z : m.zero_fractions) CHECK((z >= 0.0 && z <= 1.0));
  });
  const auto b = train(net, s, cfg);
  CHECK(hook_calls == 5);
  REQUIRE(a.history.size() == 5);
  CHECK(a.net == b.net);
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(a.history[e].epoch == e + 1);
    CHECK(a.history[e].mse == b.history[e].mse);
    CHECK(a.history[e].sup_estimate == b.history[e].sup_estimate);
    CHECK(a.history[e].zero_fractions == b.history[e].zero_fractions);
  }
  cfg.shuffle_seed += 1;
  CHECK_FALSE(train(net, s, cfg).net == a.net);
}

TEST_CASE("batch size above one averages the gradient") {
  const Sample s = grid_sample(2, 12);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.lr = 0.05;
  cfg.epochs = 1;
  cfg.batch_size = s.size();
  const ReluNetwork net = init_network({2, 3, 1}, 6);
  ReluNetwork manual = net;
  sgd_step(manual, grad_mse(net, s), cfg.lr);
  const auto trained = train(net, s, cfg).net;
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i)
      CHECK(trained.layers[l].weights[i] ==
            doctest::Approx(manual.layers[l].weights[i]).epsilon(1e-12));
}

TEST_CASE("non-finite loss aborts with the last finite snapshot") {
  const Sample s = grid_sample(2, 20);
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::sgd;
  cfg.lr = 1e6;
  cfg.epochs = 50;
  ReluNetwork net = init_network({2, 3, 4}, 2);
  for (auto& layer : net.layers)
    for (auto& b : layer.bias) b = 1.0;
  try {
    train(net, s, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    CHECK(std::isfinite(mse_loss(e.snapshot(), s)));
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("n=2, w=2, d=1 grid training lands in the width-2 band") {
  const Sample s = grid_sample(2, 100);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.init_seed = 1000;
  cfg.shuffle_seed = cfg.init_seed << 20;
  const auto result = train(init_network({2, 2, 1}, cfg.init_seed), s, cfg);
  const double sup = result.history.back().sup_estimate;
  CHECK(sup >= 0.120);
  CHECK(sup <= 0.20);
  CHECK(std::isfinite(result.history.back().mse));
}

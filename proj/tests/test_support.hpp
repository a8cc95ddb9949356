#pragma once

#include "narrownet/network.hpp"

#include <random>

namespace narrownet::testing {

/// Glorot weights with biases drawn from U(-0.1, 0.1). Zero biases put every neuron
/// downstream of a fully dead layer exactly on its kink.
inline ReluNetwork random_configuration(const ArchSpec& arch, std::mt19937_64& rng) {
  ReluNetwork net = init_network(arch, rng());
  std::uniform_real_distribution<double> bias(-0.1, 0.1);
  for (auto& layer : net.layers)
    for (auto& b : layer.bias) b = bias(rng);
  return net;
}

}  // namespace narrownet::testing

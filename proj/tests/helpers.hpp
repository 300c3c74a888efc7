#pragma once

#include "dccycle/network.hpp"
#include "dccycle/trainer.hpp"

#include "oracles.hpp"

#include <random>

namespace testing {

using namespace dccycle;

/// Discriminator whose every patch equals `activation(bias)`: all weights
/// zero, final bias set.
template <typename Scalar>
Network<Scalar> constant_discriminator(DiscriminatorSpec spec, double bias) {
  Network<Scalar> net = build_discriminator<Scalar>(spec, 0);
  net.parameters().setZero();
  for (auto it = net.layers().rbegin(); it != net.layers().rend(); ++it) {
    if (it->kind == LayerKind::conv) {
      net.parameters()(it->bias_offset) = Scalar(bias);
      break;
    }
  }
  return net;
}

inline DiscriminatorSpec small_discriminator(Index size, OutputActivation activation = OutputActivation::sigmoid) {
  return {size, 4, 2, activation};
}

inline GeneratorSpec small_generator(Index size) { return {size, 4, 1, 1}; }

template <typename Scalar>
Image<Scalar> random_image(Index side, std::mt19937_64& rng, Domain domain = Domain::none, std::string id = {}) {
  const Grid<double> metric = oracle::structured_grid(side, rng, 0.15);
  return Image<Scalar>(Grid<Scalar>((metric.array() * 2.0 - 1.0).template cast<Scalar>()), ValueRange::model, domain,
                       std::move(id));
}

template <typename Scalar>
TrainingBatch<Scalar> random_batch(Index side, std::mt19937_64& rng) {
  return {random_image<Scalar>(side, rng, Domain::x), random_image<Scalar>(side, rng, Domain::y),
          random_image<Scalar>(side, rng, Domain::x), random_image<Scalar>(side, rng, Domain::y)};
}

template <typename Scalar>
ModelSet<Scalar> small_models(Index side, LossFamily family, std::uint64_t seed) {
  DiscriminatorSpec d = small_discriminator(side, output_activation_for(family));
  return {build_generator<Scalar>(small_generator(side), derive_seed(seed, 0)),
          build_generator<Scalar>(small_generator(side), derive_seed(seed, 1)),
          build_discriminator<Scalar>(d, derive_seed(seed, 2)), build_discriminator<Scalar>(d, derive_seed(seed, 3))};
}

inline ModelConfig small_model_config(Index side, LossFamily family) {
  return {small_generator(side), small_discriminator(side, output_activation_for(family))};
}

}  // namespace testing

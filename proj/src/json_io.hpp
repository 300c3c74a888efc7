#pragma once

// JSON encodings of the configuration structs, shared by checkpoints and run
// manifests.

#include "dccycle/trainer.hpp"

#include <json.hpp>

namespace dccycle {

using json = nlohmann::json;

inline json to_json(const GeneratorSpec& s) {
  return {{"input_size", s.input_size},
          {"base_channels", s.base_channels},
          {"n_residual_blocks", s.n_residual_blocks},
          {"downsample_stages", s.downsample_stages},
          {"normalization", "instance"}};
}

inline GeneratorSpec generator_spec_from_json(const json& j) {
  GeneratorSpec s;
  s.input_size = j.at("input_size").get<Index>();
  s.base_channels = j.at("base_channels").get<Index>();
  s.n_residual_blocks = j.at("n_residual_blocks").get<int>();
  s.downsample_stages = j.at("downsample_stages").get<int>();
  return s;
}

inline json to_json(const DiscriminatorSpec& s) {
  return {{"input_size", s.input_size},
          {"base_channels", s.base_channels},
          {"downsample_stages", s.downsample_stages},
          {"output_activation", s.output_activation == OutputActivation::sigmoid ? "sigmoid" : "linear"}};
}

inline DiscriminatorSpec discriminator_spec_from_json(const json& j) {
  DiscriminatorSpec s;
  s.input_size = j.at("input_size").get<Index>();
  s.base_channels = j.at("base_channels").get<Index>();
  s.downsample_stages = j.at("downsample_stages").get<int>();
  s.output_activation =
      j.at("output_activation").get<std::string>() == "sigmoid" ? OutputActivation::sigmoid : OutputActivation::linear;
  return s;
}

inline json to_json(const ModelConfig& m) {
  return {{"generator", to_json(m.generator)}, {"discriminator", to_json(m.discriminator)}};
}

inline ModelConfig model_config_from_json(const json& j) {
  return {generator_spec_from_json(j.at("generator")), discriminator_spec_from_json(j.at("discriminator"))};
}

inline json to_json(const LossConfig& l) {
  return {{"family", to_string(l.family)}, {"dual_contrast", l.dual_contrast}, {"lambda", l.lambda}, {"beta", l.beta}};
}

inline LossConfig loss_config_from_json(const json& j) {
  LossConfig l;
  l.family = parse_loss_family(j.at("family").get<std::string>());
  l.dual_contrast = j.at("dual_contrast").get<bool>();
  l.lambda = j.at("lambda").get<double>();
  l.beta = j.at("beta").get<double>();
  return l;
}

inline json to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"g_steps_per_d_step", t.g_steps_per_d_step},
          {"optimizer", "adam"},
          {"learning_rate", t.learning_rate},
          {"adam_beta1", t.adam_beta1},
          {"adam_beta2", t.adam_beta2},
          {"adam_epsilon", t.adam_epsilon},
          {"lr_decay", t.lr_decay},
          {"seed", t.seed},
          {"loss", to_json(t.loss)},
          {"checkpoint_every", t.checkpoint_every},
          {"replay_pool", t.replay_pool},
          {"replay_pool_size", t.replay_pool_size}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig t;
  t.epochs = j.at("epochs").get<int>();
  t.batch_size = j.at("batch_size").get<int>();
  t.g_steps_per_d_step = j.at("g_steps_per_d_step").get<int>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.adam_beta1 = j.at("adam_beta1").get<double>();
  t.adam_beta2 = j.at("adam_beta2").get<double>();
  t.adam_epsilon = j.at("adam_epsilon").get<double>();
  t.lr_decay = j.at("lr_decay").get<bool>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.loss = loss_config_from_json(j.at("loss"));
  t.checkpoint_every = j.at("checkpoint_every").get<int>();
  t.replay_pool = j.at("replay_pool").get<bool>();
  t.replay_pool_size = j.at("replay_pool_size").get<int>();
  return t;
}

inline json to_json(const TrainCounters& c) {
  return {{"steps", c.steps},
          {"generator_updates", c.generator_updates},
          {"discriminator_updates", c.discriminator_updates},
          {"epoch", c.epoch}};
}

inline TrainCounters counters_from_json(const json& j) {
  TrainCounters c;
  c.steps = j.at("steps").get<std::int64_t>();
  c.generator_updates = j.at("generator_updates").get<std::int64_t>();
  c.discriminator_updates = j.at("discriminator_updates").get<std::int64_t>();
  c.epoch = j.at("epoch").get<int>();
  return c;
}

}  // namespace dccycle

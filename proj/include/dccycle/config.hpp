#pragma once

// Flat `key = value` run configuration. Lines starting with '#' are comments.
//
//   preset              toy | full (applied before the other keys)
//   data_source         toy | dir | manifest
//   data_path           directory holding x/ and y/, or a manifest CSV
//   toy_count, toy_gamma, toy_seed
//   train_fraction      in (0,1)
//   image_size          generator and discriminator input side
//   gen_base_channels, gen_residual_blocks, gen_downsample
//   disc_base_channels, disc_downsample
//   epochs, batch_size, g_steps_per_d_step, learning_rate, adam_beta1,
//   adam_beta2, lr_decay, seed, checkpoint_every, replay_pool, replay_pool_size
//   loss_family         mae_mse | ssim_ce
//   dual_contrast       true | false
//   lambda, beta
//   ssim_window, ssim_sigma, ssim_k1, ssim_k2
//   precision           f32 | f64
//   plan_name
//   repeat_seeds        comma-separated integers
//   beta_grid           comma-separated reals

#include "dccycle/metrics.hpp"
#include "dccycle/trainer.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dccycle {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct DataConfig {
  std::string source = "toy";
  std::string path;
  std::size_t toy_count = 50;
  double toy_gamma = 1.5;
  std::uint64_t toy_seed = 0;
  double train_fraction = 0.8;
};

struct RunConfig {
  DataConfig data;
  ModelConfig model = ModelConfig::toy();
  TrainConfig train;
  SSIMParams ssim;
  std::string precision = "f32";
  std::string plan_name = "default";
  std::vector<std::uint64_t> repeat_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> beta_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  /// Desk-scale profile: 64x64 images, 40 train / 10 test toy images, 30 epochs.
  static RunConfig toy();
  /// 256x256 networks, 200 epochs, 90/10 split.
  static RunConfig full();

  /// Applies one key. Throws ConfigError naming the key on unknown keys or
  /// malformed values.
  void set(std::string_view key, std::string_view value);

  /// Propagates shared fields (image size, loss family -> discriminator output)
  /// and validates everything.
  void resolve();

  /// Canonical `key = value` text of every field, after resolve().
  std::string to_text() const;
};

RunConfig parse_config_text(std::string_view text);
RunConfig load_config_file(const std::string& path);

/// 64-bit FNV-1a of `text` as 16 hex digits.
std::string content_hash(std::string_view text);

/// Version identifier of the code that produced a result.
std::string code_version();

}  // namespace dccycle

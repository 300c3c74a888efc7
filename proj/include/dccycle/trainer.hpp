#pragma once

#include "dccycle/data.hpp"
#include "dccycle/losses.hpp"
#include "dccycle/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dccycle {

struct ModelConfig {
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;

  /// 64x64 desk-scale networks.
  static ModelConfig toy();
  /// 256x256, 64 channels, 9 residual blocks.
  static ModelConfig full();

  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  int epochs = 200;
  int batch_size = 1;
  int g_steps_per_d_step = 5;
  double learning_rate = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool lr_decay = true;  // linear decay to zero over the second half of training
  std::uint64_t seed = 0;
  LossConfig loss;
  int checkpoint_every = 0;  // epochs; 0 writes only the final checkpoint
  bool replay_pool = false;  // history of past fakes for discriminator updates
  int replay_pool_size = 50;

  void validate() const;
  double learning_rate_at(int epoch) const;

  bool operator==(const TrainConfig&) const = default;
};

template <typename Scalar>
struct AdamMoments {
  Vector<Scalar> m;
  Vector<Scalar> v;
};

struct TrainCounters {
  std::int64_t steps = 0;
  std::int64_t generator_updates = 0;
  std::int64_t discriminator_updates = 0;
  int epoch = 0;

  bool operator==(const TrainCounters&) const = default;
};

template <typename Scalar>
struct TrainState {
  ModelSet<Scalar> models;
  AdamMoments<Scalar> adam_g, adam_f, adam_dx, adam_dy;
  TrainCounters counters;
  std::mt19937_64 rng;
  std::uint64_t seed = 0;
  // Replay history: past F(y) for D_X and past G(x) for D_Y.
  std::vector<Image<Scalar>> pool_x, pool_y;
};

/// Stream-specific seed derived from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Builds all four networks from `train.seed` (one derived seed per network)
/// and zeroed optimizer moments.
template <typename Scalar>
TrainState<Scalar> initialize_state(const ModelConfig& model, const TrainConfig& train);

class NonFiniteLossError : public std::runtime_error {
 public:
  explicit NonFiniteLossError(const LossBreakdown& breakdown)
      : std::runtime_error("non-finite loss: " + breakdown.describe()), breakdown_(breakdown) {}
  const LossBreakdown& breakdown() const { return breakdown_; }

 private:
  LossBreakdown breakdown_;
};

/// One generator update (G and F jointly on the total generator loss). Every
/// g_steps_per_d_step-th call also updates D_X and D_Y on this batch with the
/// generated images treated as constants. All losses are evaluated before any
/// parameter moves.
template <typename Scalar>
LossBreakdown train_step(TrainState<Scalar>& state, const TrainingBatch<Scalar>& batch, const TrainConfig& config,
                         const SSIMParams& ssim_params = {});

struct LogRow {
  std::int64_t step = 0;
  int epoch = 0;
  LossBreakdown losses;
};

/// "step,epoch,adv_G,...,total_DY".
std::string training_log_header();
void write_log_row(std::ostream& out, const LogRow& row);
std::vector<LogRow> read_training_log(const std::string& path);

struct FitOptions {
  /// Directory for train.csv and checkpoints; empty keeps everything in memory.
  std::string run_dir;
  /// Resolved configuration text stored in checkpoints and hashed.
  std::string config_text;
  /// Receives one progress line per epoch when non-null.
  std::ostream* progress = nullptr;
  /// Window for the SSIM cycle term.
  SSIMParams ssim;
};

template <typename Scalar>
struct FitResult {
  TrainState<Scalar> state;
  std::vector<LogRow> log;
};

/// Trains for config.epochs epochs of train.size() steps each. When `resume`
/// is given training continues from that state (its epoch counter says where).
template <typename Scalar>
FitResult<Scalar> fit(const DatasetView& train, const ModelConfig& model, const TrainConfig& config,
                      const FitOptions& options = {}, const TrainState<Scalar>* resume = nullptr);

/// MAE / PSNR / SSIM of every synthesized test image against its paired
/// ground truth, in metric space.
template <typename Scalar>
MetricReport evaluate(const ModelSet<Scalar>& models, const DatasetView& test, Direction direction,
                      const SSIMParams& params = {});

}  // namespace dccycle

#include "dccycle/trainer.hpp"

#include "dccycle/checkpoint.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace dccycle {

namespace fs = std::filesystem;

ModelConfig ModelConfig::toy() { return {GeneratorSpec::toy(), DiscriminatorSpec::toy()}; }

ModelConfig ModelConfig::full() { return {GeneratorSpec{}, DiscriminatorSpec{}}; }

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size != 1) throw std::invalid_argument("batch_size must be 1");
  if (g_steps_per_d_step < 1) throw std::invalid_argument("g_steps_per_d_step must be >= 1");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning_rate must be >= 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) throw std::invalid_argument("adam_beta1 must lie in [0,1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) throw std::invalid_argument("adam_beta2 must lie in [0,1)");
  if (!(adam_epsilon > 0)) throw std::invalid_argument("adam_epsilon must be positive");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (replay_pool_size < 1) throw std::invalid_argument("replay_pool_size must be >= 1");
  loss.validate();
}

double TrainConfig::learning_rate_at(int epoch) const {
  if (!lr_decay || epochs < 2) return learning_rate;
  const int decay_start = epochs / 2;
  if (epoch < decay_start) return learning_rate;
  const double fraction = static_cast<double>(epoch - decay_start + 1) / static_cast<double>(epochs - decay_start + 1);
  return learning_rate * std::max(0.0, 1.0 - fraction);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

template <typename Scalar>
AdamMoments<Scalar> zero_moments(const Network<Scalar>& net) {
  return {Vector<Scalar>::Zero(net.parameter_count()), Vector<Scalar>::Zero(net.parameter_count())};
}

template <typename Scalar>
void adam_update(Network<Scalar>& net, const Vector<Scalar>& grad, AdamMoments<Scalar>& moments, std::int64_t t,
                 const TrainConfig& config, double lr) {
  const Scalar b1 = Scalar(config.adam_beta1);
  const Scalar b2 = Scalar(config.adam_beta2);
  moments.m = b1 * moments.m + (Scalar(1) - b1) * grad;
  moments.v = b2 * moments.v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  const double correction1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(t));
  const Scalar step = Scalar(lr / correction1);
  const Scalar root_correction = Scalar(std::sqrt(correction2));
  net.parameters().array() -=
      step * moments.m.array() / (moments.v.array().sqrt() / root_correction + Scalar(config.adam_epsilon));
}

// History pool of generated images: until full, every new image is stored and
// returned; afterwards half the time a random stored image is returned and
// replaced.
template <typename Scalar>
Image<Scalar> query_pool(std::vector<Image<Scalar>>& pool, const Image<Scalar>& image, std::size_t capacity,
                         std::mt19937_64& rng) {
  if (pool.size() < capacity) {
    pool.push_back(image);
    return image;
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < 0.5) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t slot = pick(rng);
    Image<Scalar> previous = pool[slot];
    pool[slot] = image;
    return previous;
  }
  return image;
}

}  // namespace

template <typename Scalar>
TrainState<Scalar> initialize_state(const ModelConfig& model, const TrainConfig& train) {
  train.validate();
  if (model.discriminator.output_activation != output_activation_for(train.loss.family)) {
    throw std::invalid_argument(std::string("discriminator output activation does not match loss family ") +
                                to_string(train.loss.family));
  }
  if (model.generator.input_size != model.discriminator.input_size) {
    throw std::invalid_argument("generator and discriminator input_size differ");
  }
  TrainState<Scalar> state{
      {build_generator<Scalar>(model.generator, derive_seed(train.seed, 0)),
       build_generator<Scalar>(model.generator, derive_seed(train.seed, 1)),
       build_discriminator<Scalar>(model.discriminator, derive_seed(train.seed, 2)),
       build_discriminator<Scalar>(model.discriminator, derive_seed(train.seed, 3))},
      {},
      {},
      {},
      {},
      {},
      std::mt19937_64(derive_seed(train.seed, 4)),
      train.seed,
      {},
      {}};
  state.adam_g = zero_moments(state.models.g);
  state.adam_f = zero_moments(state.models.f);
  state.adam_dx = zero_moments(state.models.dx);
  state.adam_dy = zero_moments(state.models.dy);
  return state;
}

template <typename Scalar>
LossBreakdown train_step(TrainState<Scalar>& state, const TrainingBatch<Scalar>& batch, const TrainConfig& config,
                         const SSIMParams& ssim_params) {
  ModelSet<Scalar>& models = state.models;
  GeneratorGradients<Scalar> g_grads{Vector<Scalar>::Zero(models.g.parameter_count()),
                                     Vector<Scalar>::Zero(models.f.parameter_count())};
  LossBreakdown breakdown;
  const GeneratorOutputs<Scalar> fakes =
      generator_objective(models, batch, config.loss, ssim_params, breakdown, &g_grads);

  const bool update_discriminators = (state.counters.steps + 1) % config.g_steps_per_d_step == 0;
  Image<Scalar> fake_y = fakes.fake_y;
  Image<Scalar> fake_x = fakes.fake_x;
  if (config.replay_pool && update_discriminators) {
    const auto capacity = static_cast<std::size_t>(config.replay_pool_size);
    fake_y = query_pool(state.pool_y, fakes.fake_y, capacity, state.rng);
    fake_x = query_pool(state.pool_x, fakes.fake_x, capacity, state.rng);
  }
  DiscriminatorGradients<Scalar> d_grads;
  if (update_discriminators) {
    d_grads = {Vector<Scalar>::Zero(models.dx.parameter_count()), Vector<Scalar>::Zero(models.dy.parameter_count())};
  }
  discriminator_objective(models, batch, fake_y, fake_x, config.loss, breakdown,
                          update_discriminators ? &d_grads : nullptr);
  if (!breakdown.all_finite()) throw NonFiniteLossError(breakdown);

  const double lr = config.learning_rate_at(state.counters.epoch);
  const std::int64_t g_t = state.counters.generator_updates + 1;
  adam_update(models.g, g_grads.g, state.adam_g, g_t, config, lr);
  adam_update(models.f, g_grads.f, state.adam_f, g_t, config, lr);
  state.counters.generator_updates = g_t;
  if (update_discriminators) {
    const std::int64_t d_t = state.counters.discriminator_updates + 1;
    adam_update(models.dx, d_grads.dx, state.adam_dx, d_t, config, lr);
    adam_update(models.dy, d_grads.dy, state.adam_dy, d_t, config, lr);
    state.counters.discriminator_updates = d_t;
  }
  ++state.counters.steps;
  return breakdown;
}

std::string training_log_header() { return "step,epoch," + LossBreakdown::csv_header(); }

void write_log_row(std::ostream& out, const LogRow& row) {
  out << row.step << ',' << row.epoch;
  const auto old_precision = out.precision(17);
  for (double v : row.losses.values()) out << ',' << v;
  out.precision(old_precision);
  out << '\n';
}

std::vector<LogRow> read_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read training log '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != training_log_header()) {
    throw std::runtime_error(path + ": unexpected training log header");
  }
  std::vector<LogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() != 2 + LossBreakdown::kFieldCount) throw std::runtime_error(path + ": malformed row");
    LogRow row;
    row.step = static_cast<std::int64_t>(cells[0]);
    row.epoch = static_cast<int>(cells[1]);
    LossBreakdown& b = row.losses;
    double* fields[] = {&b.adv_G, &b.adv_F, &b.disc_X, &b.disc_Y, &b.dc_X, &b.dc_Y, &b.cycle,
                        &b.total_generator, &b.total_discriminator_X, &b.total_discriminator_Y};
    for (std::size_t i = 0; i < LossBreakdown::kFieldCount; ++i) *fields[i] = cells[2 + i];
    rows.push_back(row);
  }
  return rows;
}

template <typename Scalar>
FitResult<Scalar> fit(const DatasetView& train, const ModelConfig& model, const TrainConfig& config,
                      const FitOptions& options, const TrainState<Scalar>* resume) {
  config.validate();
  FitResult<Scalar> result{resume != nullptr ? *resume : initialize_state<Scalar>(model, config), {}};
  TrainState<Scalar>& state = result.state;

  std::ofstream log_file;
  if (!options.run_dir.empty()) {
    fs::create_directories(options.run_dir);
    const fs::path log_path = fs::path(options.run_dir) / "train.csv";
    const bool append = resume != nullptr && fs::exists(log_path);
    log_file.open(log_path, append ? std::ios::app : std::ios::trunc);
    if (!log_file) throw std::runtime_error("cannot write " + log_path.string());
    if (!append) log_file << training_log_header() << '\n';
  }

  const std::size_t steps_per_epoch = train.size();
  for (int epoch = state.counters.epoch; epoch < config.epochs; ++epoch) {
    double cycle_sum = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const TrainingBatch<Scalar> batch = next_batch<Scalar>(train, state.rng);
      const LossBreakdown losses = train_step(state, batch, config, options.ssim);
      const LogRow row{state.counters.steps, epoch, losses};
      if (log_file.is_open()) write_log_row(log_file, row);
      result.log.push_back(row);
      cycle_sum += losses.cycle;
    }
    state.counters.epoch = epoch + 1;
    if (log_file.is_open()) log_file.flush();
    if (options.progress != nullptr) {
      *options.progress << "epoch " << state.counters.epoch << "/" << config.epochs << " lr "
                        << config.learning_rate_at(epoch) << " mean cycle "
                        << cycle_sum / static_cast<double>(std::max<std::size_t>(steps_per_epoch, 1)) << '\n';
    }
    if (!options.run_dir.empty() && config.checkpoint_every > 0 && state.counters.epoch % config.checkpoint_every == 0 &&
        state.counters.epoch < config.epochs) {
      const std::string name = "checkpoint_epoch" + std::to_string(state.counters.epoch);
      save_checkpoint((fs::path(options.run_dir) / name).string(), state, model, config, options.config_text);
    }
  }
  if (!options.run_dir.empty()) {
    save_checkpoint((fs::path(options.run_dir) / "checkpoint").string(), state, model, config, options.config_text);
  }
  return result;
}

template <typename Scalar>
MetricReport evaluate(const ModelSet<Scalar>& models, const DatasetView& test, Direction direction,
                      const SSIMParams& params) {
  const Network<Scalar>& generator = direction == Direction::x_to_y ? models.g : models.f;
  const UnpairedDataset& dataset = *test.dataset;
  const auto& sources = direction == Direction::x_to_y ? test.x_indices : test.y_indices;
  const auto& source_pool = direction == Direction::x_to_y ? dataset.domain_x : dataset.domain_y;
  const auto& target_pool = direction == Direction::x_to_y ? dataset.domain_y : dataset.domain_x;

  std::string missing;
  for (std::size_t index : sources) {
    if (paired_target(dataset, direction, index) == static_cast<std::size_t>(-1)) {
      missing += (missing.empty() ? "" : ", ") + source_pool[index].id();
    }
  }
  if (!missing.empty()) throw std::runtime_error("no paired ground truth for test images: " + missing);

  std::vector<MetricRow> rows;
  for (const SyntheticImage& synthetic : synthesize_test_set(generator, test, direction)) {
    const Image<double> real = target_pool[paired_target(dataset, direction, synthetic.source_index)].to_metric();
    const Image<double> synth = synthetic.image.to_metric();
    rows.push_back({synthetic.id, mae(real, synth), psnr(real, synth, params.dynamic_range), ssim(synth, real, params)});
  }
  return MetricReport::from_rows(std::move(rows));
}

#define DCCYCLE_INSTANTIATE_TRAINER(S)                                                                           \
  template TrainState<S> initialize_state<S>(const ModelConfig&, const TrainConfig&);                            \
  template LossBreakdown train_step(TrainState<S>&, const TrainingBatch<S>&, const TrainConfig&, const SSIMParams&); \
  template FitResult<S> fit<S>(const DatasetView&, const ModelConfig&, const TrainConfig&, const FitOptions&,      \
                               const TrainState<S>*);                                                            \
  template MetricReport evaluate(const ModelSet<S>&, const DatasetView&, Direction, const SSIMParams&);

DCCYCLE_INSTANTIATE_TRAINER(float)
DCCYCLE_INSTANTIATE_TRAINER(double)

#undef DCCYCLE_INSTANTIATE_TRAINER

}  // namespace dccycle

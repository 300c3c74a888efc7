// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. `acceptance N [M ...]` runs a subset.

#include "dccycle/config.hpp"
#include "dccycle/experiments.hpp"
#include "dccycle/layers.hpp"
#include "dccycle/toy_data.hpp"
#include "dccycle/trainer.hpp"

#include "helpers.hpp"

#include <opencv2/imgcodecs.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

using namespace dccycle;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kOracleTolerance = 1e-9;
constexpr double kStrictOracleTolerance = 1e-12;  // mae, per its contract
constexpr double kFixedPointTolerance = 1e-12;
constexpr double kGradientTolerance = 1e-3;
constexpr int kMinGradientCoordinates = 100;
constexpr double kInstanceNormMeanTolerance = 1e-5;
constexpr double kInstanceNormVarianceTolerance = 1e-4;
constexpr double kStudyMargin = 0.25;
constexpr double kReaggregationTolerance = 1e-12;
constexpr double kCycleReconstructionSSIM = 0.9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failure reasons and a short summary.
class Checker {
 public:
  void require(bool condition, const std::string& what) {
    if (!condition) failures_.push_back(what);
  }
  void note(const std::string& text) { notes_.push_back(text); }
  Outcome outcome() const {
    Outcome o;
    o.pass = failures_.empty();
    const auto& items = o.pass ? notes_ : failures_;
    for (std::size_t i = 0; i < items.size(); ++i) o.detail += (i ? "; " : "") + items[i];
    return o;
  }

 private:
  std::vector<std::string> failures_, notes_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel(double a, double b) { return oracle::relative_error(a, b); }

// 1. Loss and metric oracles.
Outcome loss_oracles() {
  Checker check;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_ce = 0, worst_sq = 0, worst_dc = 0, worst_cyc = 0, worst_mae = 0, worst_psnr = 0, worst_ssim = 0;

  for (int t = 0; t < 100; ++t) {
    Grid<double> p = oracle::uniform_grid(16, 16, rng);
    // Some saturated entries exercise the clamp.
    p(t % 16, (3 * t) % 16) = unit(rng) < 0.5 ? 0.0 : 1.0;
    for (int label : {0, 1}) {
      worst_ce = std::max(worst_ce, rel(ce_patch_loss(p, label), oracle::ce(p, label)));
      worst_sq = std::max(worst_sq, rel(squared_patch_loss(p, label), oracle::squared(p, label)));
    }
  }

  for (int t = 0; t < 100; ++t) {
    const LossFamily family = t % 2 ? LossFamily::ssim_ce : LossFamily::mae_mse;
    const Network<double> disc =
        build_discriminator<double>(testing::small_discriminator(16, output_activation_for(family)), 500 + t);
    std::vector<Image<double>> negatives;
    for (int k = 0; k < 1 + t % 3; ++k) negatives.push_back(testing::random_image<double>(16, rng));
    double expected = 0.0;
    for (const auto& n : negatives) {
      const Grid<double> s = disc.score(n);
      expected += family == LossFamily::ssim_ce ? oracle::ce(s, 0) : oracle::squared(s, 0);
    }
    expected /= static_cast<double>(negatives.size());
    worst_dc = std::max(worst_dc, rel(dc_loss<double>(disc, negatives, family), expected));
  }

  for (int t = 0; t < 100; ++t) {
    const Image<double> x = testing::random_image<double>(16, rng), xr = testing::random_image<double>(16, rng);
    const Image<double> y = testing::random_image<double>(16, rng), yr = testing::random_image<double>(16, rng);
    const double expected = oracle::mae(x.pixels(), xr.pixels()) + oracle::mae(y.pixels(), yr.pixels());
    worst_cyc = std::max(worst_cyc, rel(cycle_loss_mae(x, xr, y, yr), expected));
  }

  for (int t = 0; t < 100; ++t) {
    const Index rows = 12 + 4 * (t % 4), cols = 16 + 4 * (t % 3);
    const Grid<double> a = oracle::uniform_grid(rows, cols, rng), b = oracle::uniform_grid(rows, cols, rng);
    worst_mae = std::max(worst_mae, rel(mae(a, b), oracle::mae(a, b)));
    worst_psnr = std::max(worst_psnr, rel(psnr(a, b), oracle::psnr(a, b)));
    const Grid<double> s = oracle::structured_grid(rows, rng, 0.1).leftCols(std::min(rows, cols));
    const Grid<double> u = oracle::uniform_grid(s.rows(), s.cols(), rng);
    worst_ssim = std::max(worst_ssim, rel(ssim(s, u), oracle::ssim(s, u)));
  }

  check.require(worst_ce <= kOracleTolerance, "ce_patch_loss rel err " + fmt(worst_ce));
  check.require(worst_sq <= kOracleTolerance, "squared_patch_loss rel err " + fmt(worst_sq));
  check.require(worst_dc <= kOracleTolerance, "dc_loss rel err " + fmt(worst_dc));
  check.require(worst_cyc <= kOracleTolerance, "cycle_loss_mae rel err " + fmt(worst_cyc));
  check.require(worst_mae <= kStrictOracleTolerance, "mae rel err " + fmt(worst_mae));
  check.require(worst_psnr <= kOracleTolerance, "psnr rel err " + fmt(worst_psnr));
  check.require(worst_ssim <= kOracleTolerance, "ssim rel err " + fmt(worst_ssim));
  check.note("worst rel err: ce " + fmt(worst_ce) + ", lsq " + fmt(worst_sq) + ", dc " + fmt(worst_dc) + ", cycle " +
             fmt(worst_cyc) + ", mae " + fmt(worst_mae) + ", psnr " + fmt(worst_psnr) + ", ssim " + fmt(worst_ssim));
  return check.outcome();
}

// 2. Analytic fixed points.
Outcome fixed_points() {
  Checker check;
  int count = 0;
  auto near = [&](double got, double want, const std::string& what, double tol = kFixedPointTolerance) {
    ++count;
    check.require(std::fabs(got - want) <= tol, what + " = " + fmt(got) + ", expected " + fmt(want));
  };
  const double ln2 = std::log(2.0);
  std::mt19937_64 rng(202);

  const Grid<double> a = oracle::uniform_grid(32, 32, rng);
  near(ssim(a, a), 1.0, "ssim(a,a)");
  const Grid<double> c5 = Grid<double>::Constant(16, 16, 0.5), c2 = Grid<double>::Constant(16, 16, 0.2),
                     c7 = Grid<double>::Constant(16, 16, 0.7);
  near(ssim(c5, c5), 1.0, "ssim(0.5,0.5)");
  const SSIMParams sp;
  near(ssim(c2, c7), (2 * 0.2 * 0.7 + sp.c1()) / (0.04 + 0.49 + sp.c1()), "ssim(0.2,0.7)");

  const PatchGrid<double> half = PatchGrid<double>::Constant(16, 16, 0.5);
  near(ce_patch_loss(half, 1), ln2, "ce(0.5, 1)");
  near(ce_patch_loss(half, 0), ln2, "ce(0.5, 0)");
  PatchGrid<double> split_grid(16, 16);
  for (Index r = 0; r < 16; ++r) split_grid.row(r).setConstant(r < 8 ? 0.9 : 0.1);
  near(ce_patch_loss(split_grid, 1), -(std::log(0.9) + std::log(0.1)) / 2, "ce(0.9|0.1)");
  near(ce_patch_loss(PatchGrid<double>(PatchGrid<double>::Ones(16, 16)), 1), 0.0, "ce(perfect)", 1.1e-7);

  const DiscriminatorSpec sig = testing::small_discriminator(16, OutputActivation::sigmoid);
  const DiscriminatorSpec lin = testing::small_discriminator(16, OutputActivation::linear);
  const Network<double> d_half = testing::constant_discriminator<double>(sig, 0.0);
  const Image<double> img = testing::random_image<double>(16, rng), other = testing::random_image<double>(16, rng);
  const std::vector<Image<double>> negatives{other};
  near(dc_loss<double>(d_half, negatives, LossFamily::ssim_ce), ln2, "dc(0.5, ssim_ce)");
  near(dc_loss<double>(testing::constant_discriminator<double>(lin, 0.8), negatives, LossFamily::mae_mse), 0.64,
       "dc(0.8, mae_mse)");
  near(adversarial_generator_loss(d_half, img, LossFamily::ssim_ce), ln2, "adv(0.5, ssim_ce)");
  near(adversarial_generator_loss(testing::constant_discriminator<double>(lin, 0.25), img, LossFamily::mae_mse),
       0.5625, "adv(0.25, mae_mse)");
  LossConfig on;
  near(discriminator_loss<double>(d_half, img, other, negatives, on), 2.5 * ln2, "disc(0.5, dc on, beta 0.5)");
  LossConfig off = on;
  off.dual_contrast = false;
  near(discriminator_loss<double>(d_half, img, other, {}, off), 2.0 * ln2, "disc(0.5, dc off)");

  near(cycle_loss_mae(img, img, other, other), 0.0, "cycle_mae(identity)");
  const Image<double> lowered(Grid<double>(Grid<double>::Constant(16, 16, 0.3)), ValueRange::model);
  const Image<double> raised(Grid<double>(Grid<double>::Constant(16, 16, 0.4)), ValueRange::model);
  near(cycle_loss_mae(lowered, raised, other, other), 0.1, "cycle_mae(offset 0.1)");
  near(cycle_loss_ssim(img, img, other, other), 0.0, "cycle_ssim(identity)");

  near(mae(a, a), 0.0, "mae(a,a)");
  near(mae<double>(Grid<double>::Ones(8, 8), Grid<double>::Zero(8, 8)), 1.0, "mae(1,0)");
  near(psnr(Grid<double>(Grid<double>::Constant(16, 16, 0.3)), Grid<double>(Grid<double>::Constant(16, 16, 0.4))),
       20.0, "psnr(offset 0.1)", 1e-9);
  ++count;
  check.require(is_infinite_psnr(psnr(a, a)), "psnr(a,a) is not the infinity marker");

  near(normalize_level8(0), -1.0, "level 0");
  near(normalize_level8(255), 1.0, "level 255");
  near(normalize_level8(128), 2.0 * 128.0 / 255.0 - 1.0, "level 128");
  ++count;
  check.require(std::fabs(normalize_level8(128) - 0.003921) < 1e-6, "level 128 is not 0.003921");

  check.note(std::to_string(count) + " fixed points");
  return check.outcome();
}

// 3. Gradient checks at 64-bit.
Outcome gradient_checks() {
  Checker check;
  std::mt19937_64 rng(303);

  const Grid<double> original = testing::random_image<double>(16, rng).pixels();
  const Grid<double> rec = testing::random_image<double>(16, rng).pixels();
  Grid<double> grad;
  cycle_term_ssim(original, rec, {}, &grad);
  double worst_ssim = 0;
  int n_ssim = 0;
  for (Index i = 0; i < rec.size(); ++i, ++n_ssim) {
    const double h = 1e-4;
    Grid<double> plus = rec, minus = rec;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    const double numeric = (cycle_term_ssim(original, plus, {}) - cycle_term_ssim(original, minus, {})) / (2 * h);
    worst_ssim = std::max(worst_ssim, rel(grad.data()[i], numeric));
  }

  ModelSet<double> m = testing::small_models<double>(16, LossFamily::ssim_ce, 31);
  const TrainingBatch<double> batch = testing::random_batch<double>(16, rng);
  const LossConfig config;
  GeneratorGradients<double> g{Vector<double>::Zero(m.g.parameter_count()),
                               Vector<double>::Zero(m.f.parameter_count())};
  LossBreakdown b;
  generator_objective(m, batch, config, {}, b, &g);
  double worst_total = 0;
  int n_total = 0;
  for (int which = 0; which < 2; ++which) {
    Network<double>& net = which == 0 ? m.g : m.f;
    const Vector<double>& analytic = which == 0 ? g.g : g.f;
    std::uniform_int_distribution<Index> pick(0, net.parameter_count() - 1);
    for (int k = 0; k < 60; ++k, ++n_total) {
      const Index i = pick(rng);
      // Small step: instance norm on low-variance channels puts ReLU kinks close by.
      const double h = 1e-6, saved = net.parameters()(i);
      net.parameters()(i) = saved + h;
      const double up = total_objective(m, batch, config).total_generator;
      net.parameters()(i) = saved - h;
      const double down = total_objective(m, batch, config).total_generator;
      net.parameters()(i) = saved;
      worst_total = std::max(worst_total, rel(analytic(i), (up - down) / (2 * h)));
    }
  }

  check.require(n_ssim >= kMinGradientCoordinates && n_total >= kMinGradientCoordinates, "too few coordinates");
  check.require(worst_ssim <= kGradientTolerance, "ssim cycle gradient rel err " + fmt(worst_ssim));
  check.require(worst_total <= kGradientTolerance, "total generator gradient rel err " + fmt(worst_total));
  check.note("ssim cycle " + std::to_string(n_ssim) + " coords worst " + fmt(worst_ssim) + "; total generator " +
             std::to_string(n_total) + " coords worst " + fmt(worst_total));
  return check.outcome();
}

// 4. Architecture contract.
Outcome architecture() {
  Checker check;
  const ModelConfig full = ModelConfig::full();
  check.require(full.discriminator.grid_side() == 16, "full grid side " + std::to_string(full.discriminator.grid_side()));
  check.require(full.discriminator.receptive_field() == 110,
                "receptive field " + std::to_string(full.discriminator.receptive_field()));
  const Image<float> zero256(Grid<float>::Zero(256, 256), ValueRange::model);
  const PatchGrid<float> s = build_discriminator<float>(full.discriminator, 1).score(zero256);
  check.require(s.rows() == 16 && s.cols() == 16, "256 input gives " + std::to_string(s.rows()) + "x" +
                                                      std::to_string(s.cols()) + " grid");

  for (const GeneratorSpec& spec : {GeneratorSpec::toy(), full.generator}) {
    const Image<float> out =
        build_generator<float>(spec, 2).translate(Image<float>(Grid<float>::Zero(spec.input_size, spec.input_size),
                                                               ValueRange::model));
    check.require(out.height() == spec.input_size && out.width() == spec.input_size, "generator changed shape");
    check.require(out.pixels().minCoeff() >= -1 && out.pixels().maxCoeff() <= 1, "generator left [-1,1]");
  }

  // Normalization operator on unit-scale channels of assorted offsets and scales.
  std::mt19937_64 rng(404);
  double worst_mean = 0, worst_var = 0;
  for (int t = 0; t < 50; ++t) {
    FeatureMap<double> m(8, 16, 16);
    m.data = oracle::uniform_grid(8, 256, rng, -1.0, 1.0);
    for (Index c = 0; c < 8; ++c) m.data.row(c).array() = m.data.row(c).array() * (1.0 + c) + (t - 25.0) * 0.3;
    const FeatureMap<double> n = instance_normalize(m);
    for (Index c = 0; c < 8; ++c) {
      const double mean = n.data.row(c).mean();
      worst_mean = std::max(worst_mean, std::fabs(mean));
      worst_var = std::max(worst_var, std::fabs((n.data.row(c).array() - mean).square().mean() - 1.0));
    }
  }
  check.require(worst_mean <= kInstanceNormMeanTolerance, "instance norm mean " + fmt(worst_mean));
  check.require(worst_var <= kInstanceNormVarianceTolerance, "instance norm variance " + fmt(worst_var));

  // Inside an initialized generator: reported, see README on epsilon.
  const Network<double> g = build_generator<double>(GeneratorSpec::toy(), 3);
  const UnpairedDataset toy = make_toy_dataset({2, 64, 0, 1.5});
  Tape<double> tape;
  g.forward(FeatureMap<double>::from_grid(toy.domain_x[0].pixels()), &tape);
  double net_mean = 0, net_var = 0;
  for (std::size_t i = 0; i < g.layers().size(); ++i) {
    if (g.layers()[i].kind != LayerKind::instance_norm) continue;
    const FeatureMap<double> n = instance_normalize(tape.inputs[i]);
    for (Index c = 0; c < n.channels; ++c) {
      const double mean = n.data.row(c).mean();
      net_mean = std::max(net_mean, std::fabs(mean));
      net_var = std::max(net_var, std::fabs((n.data.row(c).array() - mean).square().mean() - 1.0));
    }
  }
  check.require(net_mean <= kInstanceNormMeanTolerance, "in-network instance norm mean " + fmt(net_mean));
  check.note("256 -> 16x16 grid, rf 110; IN worst |mean| " + fmt(worst_mean) + ", |var-1| " + fmt(worst_var) +
             "; in-network |mean| " + fmt(net_mean) + ", |var-1| " + fmt(net_var) + " (epsilon on small channels)");
  return check.outcome();
}

// 5. Training mechanics.
Outcome training_mechanics() {
  Checker check;
  std::mt19937_64 rng(505);
  TrainConfig config;
  config.seed = 5;
  const ModelConfig model = testing::small_model_config(16, LossFamily::ssim_ce);
  TrainState<double> state = initialize_state<double>(model, config);
  std::vector<TrainingBatch<double>> batches;
  for (int i = 0; i < 10; ++i) batches.push_back(testing::random_batch<double>(16, rng));
  bool ratio_ok = true, schedule_ok = true;
  for (int step = 1; step <= 1000; ++step) {
    const Vector<double> dx = state.models.dx.parameters();
    train_step(state, batches[static_cast<std::size_t>(step % 10)], config);
    const auto& c = state.counters;
    ratio_ok &= c.steps == step && c.generator_updates == step && c.discriminator_updates == step / 5;
    schedule_ok &= (state.models.dx.parameters() != dx) == (step % 5 == 0);
  }
  check.require(ratio_ok, "update counters broke the 5:1 invariant");
  check.require(schedule_ok, "discriminator moved off schedule");

  double worst_gen = 0, least_disc = std::numeric_limits<double>::infinity();
  for (LossFamily family : {LossFamily::ssim_ce, LossFamily::mae_mse}) {
    for (int t = 0; t < 5; ++t) {
      const ModelSet<double> m = testing::small_models<double>(16, family, 70 + t);
      const TrainingBatch<double> batch = testing::random_batch<double>(16, rng);
      LossConfig on;
      on.family = family;
      LossConfig off = on;
      off.dual_contrast = false;
      auto gen = [&](const LossConfig& cfg) {
        GeneratorGradients<double> g{Vector<double>::Zero(m.g.parameter_count()),
                                     Vector<double>::Zero(m.f.parameter_count())};
        LossBreakdown b;
        generator_objective(m, batch, cfg, {}, b, &g);
        return g;
      };
      auto disc = [&](const LossConfig& cfg) {
        DiscriminatorGradients<double> g{Vector<double>::Zero(m.dx.parameter_count()),
                                         Vector<double>::Zero(m.dy.parameter_count())};
        LossBreakdown b;
        discriminator_objective(m, batch, m.g.translate(batch.x), m.f.translate(batch.y), cfg, b, &g);
        return g;
      };
      const auto g_on = gen(on), g_off = gen(off);
      const auto d_on = disc(on), d_off = disc(off);
      worst_gen = std::max({worst_gen, (g_on.g - g_off.g).cwiseAbs().maxCoeff(),
                            (g_on.f - g_off.f).cwiseAbs().maxCoeff()});
      least_disc = std::min({least_disc, (d_on.dx - d_off.dx).norm(), (d_on.dy - d_off.dy).norm()});
    }
  }
  check.require(worst_gen == 0.0, "dual contrast changed a generator gradient by " + fmt(worst_gen));
  check.require(least_disc > 1e-8, "dual contrast discriminator gradient norm only " + fmt(least_disc));

  UnpairedDataset data = make_toy_dataset({25, 16, 9, 1.5});
  data.train_fraction = 0.8;
  const DatasetSplit parts = split(data, 0);
  TrainConfig replay = config;
  replay.epochs = 1;
  const FitResult<double> a = fit<double>(parts.train, model, replay);
  const FitResult<double> b = fit<double>(parts.train, model, replay);
  bool same = a.log.size() == 20 && b.log.size() == 20;
  for (std::size_t i = 0; same && i < a.log.size(); ++i) same = a.log[i].losses == b.log[i].losses;
  check.require(same, "same-seed 20-step runs diverged");
  check.require(a.state.models.g.parameters() == b.state.models.g.parameters(), "same-seed parameters differ");

  check.note("1000 steps, " + std::to_string(state.counters.discriminator_updates) +
             " discriminator updates; dc generator grad diff " + fmt(worst_gen) + ", min disc grad diff " +
             fmt(least_disc) + "; 20-step replay identical");
  return check.outcome();
}

// 6. Toy directional study.
Outcome toy_study() {
  Checker check;
  RunConfig base = RunConfig::toy();
  base.resolve();
  const UnpairedDataset data = load_dataset(base);
  const auto t0 = std::chrono::steady_clock::now();

  double trained = 0, untrained = 0;
  int n = 0;
  std::vector<LogRow> seed0_log;
  std::string per_seed;
  double rec_ssim = 0;
  for (std::uint64_t seed : {0, 1, 2}) {
    RunConfig cfg = base;
    cfg.train.seed = seed;
    cfg.resolve();
    const DatasetSplit parts = split(data, seed);
    const TrainState<float> init = initialize_state<float>(cfg.model, cfg.train);
    FitResult<float> result = fit<float>(parts.train, cfg.model, cfg.train, {"", "", nullptr, cfg.ssim});
    for (Direction dir : {Direction::x_to_y, Direction::y_to_x}) {
      const double before = evaluate(init.models, parts.test, dir, cfg.ssim).ssim.mean;
      const double after = evaluate(result.state.models, parts.test, dir, cfg.ssim).ssim.mean;
      untrained += before;
      trained += after;
      ++n;
      per_seed += (per_seed.empty() ? "" : ", ") + std::string("s") + std::to_string(seed) + " " + to_string(dir) +
                  " " + fmt(before) + "->" + fmt(after);
    }
    std::cerr << "  seed " << seed << " trained\n";
    if (seed == 0) {
      seed0_log = result.log;
      double sum = 0;
      for (std::size_t i = 0; i < parts.test.x_indices.size(); ++i) {
        const Image<float> x = parts.test.x(i).cast<float>();
        const Image<float> r = result.state.models.f.translate(result.state.models.g.translate(x));
        sum += ssim(r.to_metric(), x.to_metric());
      }
      rec_ssim = sum / static_cast<double>(parts.test.x_indices.size());
    }
  }
  trained /= n;
  untrained /= n;
  check.require(trained - untrained >= kStudyMargin,
                "trained ssim " + fmt(trained) + " vs untrained " + fmt(untrained));
  check.require(rec_ssim > kCycleReconstructionSSIM, "cycle reconstruction ssim " + fmt(rec_ssim));
  const double first_cycle = seed0_log.front().losses.cycle, last_cycle = seed0_log.back().losses.cycle;
  check.require(last_cycle < first_cycle, "cycle loss did not fall");

  // beta = 0 against dual contrast off, same seed, full schedule.
  RunConfig zero = base, off = base;
  zero.train.loss.beta = 0.0;
  off.train.loss.dual_contrast = false;
  zero.resolve();
  off.resolve();
  const DatasetSplit parts0 = split(data, 0);
  const FitResult<float> za = fit<float>(parts0.train, zero.model, zero.train, {"", "", nullptr, zero.ssim});
  const FitResult<float> ob = fit<float>(parts0.train, off.model, off.train, {"", "", nullptr, off.ssim});
  bool identical = za.log.size() == ob.log.size();
  for (std::size_t i = 0; identical && i < za.log.size(); ++i) {
    LossBreakdown a = za.log[i].losses, b = ob.log[i].losses;
    a.dc_X = a.dc_Y = 0;  // the beta = 0 run still logs the unweighted dc terms
    identical = a == b;
  }
  identical = identical && za.state.models.g.parameters() == ob.state.models.g.parameters() &&
              za.state.models.dx.parameters() == ob.state.models.dx.parameters();
  check.require(identical, "beta = 0 and dual contrast off diverged");

  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  check.note("mean test ssim " + fmt(untrained) + " -> " + fmt(trained) + " (" + per_seed +
             "); cycle rec ssim " + fmt(rec_ssim) + "; cycle loss " + fmt(first_cycle) + " -> " + fmt(last_cycle) +
             "; beta 0 == dc off over " + std::to_string(za.log.size()) + " steps; " + fmt(minutes) + " min");
  return check.outcome();
}

// 7. Ablation and sweep plumbing.
const char* kTinyConfig =
    "preset = toy\nimage_size = 16\ngen_base_channels = 4\ngen_residual_blocks = 1\ndisc_base_channels = 4\n"
    "disc_downsample = 2\ntoy_count = 8\ntrain_fraction = 0.75\nepochs = 1\nplan_name = tiny\nrepeat_seeds = 0, 1\n"
    "beta_grid = 0.2, 0.5, 0.8\n";

std::vector<std::string> csv_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Outcome plumbing() {
  Checker check;
  const fs::path root = fs::temp_directory_path() / "dccycle_acceptance";
  fs::remove_all(root);
  const RunConfig base = parse_config_text(kTinyConfig);

  const ExperimentPlan plan = ExperimentPlan::ablation(base);
  check.require(plan.total_runs() == 16, "plan has " + std::to_string(plan.total_runs()) + " runs");
  const ExperimentResult ablation = run_ablation(plan, {(root / "ablation").string(), nullptr, false});
  const fs::path dir = root / "ablation" / "tiny";
  check.require(ablation.tables.size() == 2, "expected two tables");
  const std::regex cell(R"(-?[0-9]+\.[0-9]{5} \([0-9]+\.[0-9]{5}\))");
  double worst = 0;
  for (const ResultsTable& table : ablation.tables) {
    const auto lines = csv_lines(dir / ("table_" + std::string(to_string(table.direction)) + ".csv"));
    check.require(lines.size() == 5, "table has " + std::to_string(lines.size()) + " lines");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::vector<std::string> fields;
      std::stringstream s(lines[i]);
      for (std::string f; std::getline(s, f, ',');) fields.push_back(f);
      check.require(fields.size() == 6 && std::regex_match(fields[1], cell) && std::regex_match(fields[2], cell) &&
                        std::regex_match(fields[3], cell),
                    "malformed row: " + lines[i]);
    }
    check.require(table.rows.size() == 4, "table has " + std::to_string(table.rows.size()) + " rows");
    for (std::size_t c = 0; c < table.rows.size() && c < plan.cells.size(); ++c) {
      const ResultsRow& row = table.rows[c];
      check.require(row.complete && row.repeats == 2, row.cell + " incomplete");
      std::vector<MetricReport> stored;
      for (std::uint64_t seed : base.repeat_seeds) {
        stored.push_back(MetricReport::read_csv((dir / plan.cells[c].slug / std::to_string(seed) /
                                                 ("metrics_" + std::string(to_string(table.direction)) + ".csv"))
                                                    .string()));
      }
      const ResultsRow again = aggregate_runs(row.cell, table.direction, stored);
      for (auto [x, y] : {std::pair{again.mae, row.mae}, std::pair{again.psnr, row.psnr},
                          std::pair{again.ssim, row.ssim}}) {
        worst = std::max({worst, std::fabs(x.mean - y.mean), std::fabs(x.std - y.std)});
      }
    }
  }
  check.require(worst <= kReaggregationTolerance, "re-aggregation differs by " + fmt(worst));

  const ExperimentResult sweep =
      run_beta_sweep(ExperimentPlan::beta_sweep(base), {(root / "sweep").string(), nullptr, false});
  const fs::path sdir = root / "sweep" / "tiny";
  for (const char* name : {"sweep_a2b.csv", "sweep_b2a.csv"}) {
    const auto lines = csv_lines(sdir / name);
    check.require(lines.size() == 4, std::string(name) + " has " + std::to_string(lines.size()) + " lines");
  }
  for (const char* name : {"sweep_mae.png", "sweep_psnr.png", "sweep_ssim.png"}) {
    const cv::Mat img = cv::imread((sdir / name).string());
    check.require(!img.empty(), std::string(name) + " missing or unreadable");
  }
  check.require(sweep.runs.size() == 3 * base.repeat_seeds.size(),
                "sweep ran " + std::to_string(sweep.runs.size()) + " runs");
  fs::remove_all(root);
  check.note("2 tables x 4 rows, re-aggregation diff " + fmt(worst) + "; sweep csv + 3 plots");
  return check.outcome();
}

// 8. Metric monotonicity under growing perturbation.
Outcome metric_sanity() {
  Checker check;
  std::mt19937_64 rng(808);
  const Grid<double> field = toy_field(64, rng);
  const Grid<double> image = (field.array() * 0.5 + 0.25).matrix();
  const Grid<double> noise = oracle::uniform_grid(64, 64, rng, -1.0, 1.0);
  std::vector<double> mses, psnrs, ssims;
  for (int k = 1; k <= 20; ++k) {
    const Grid<double> noisy = image + noise * (0.0125 * k);
    mses.push_back(mse(image, noisy));
    psnrs.push_back(psnr(image, noisy));
    ssims.push_back(ssim(image, noisy));
  }
  for (std::size_t i = 1; i < mses.size(); ++i) {
    check.require(mses[i] > mses[i - 1], "mse not increasing at level " + std::to_string(i + 1));
    check.require(psnrs[i] < psnrs[i - 1], "psnr not decreasing at level " + std::to_string(i + 1));
    check.require(ssims[i] <= ssims[i - 1], "ssim increased at level " + std::to_string(i + 1));
  }
  check.note("psnr " + fmt(psnrs.front()) + " -> " + fmt(psnrs.back()) + " dB, ssim " + fmt(ssims.front()) + " -> " +
             fmt(ssims.back()));
  return check.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"loss oracle suite", loss_oracles},       {"analytic fixed points", fixed_points},
      {"gradient checks", gradient_checks},      {"architecture contract", architecture},
      {"training mechanics", training_mechanics}, {"toy directional study", toy_study},
      {"ablation and sweep plumbing", plumbing}, {"metric-space sanity", metric_sanity}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all &= o.pass;
    std::cout << "criterion " << id << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << " ["
              << fmt(secs) << " s] " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}

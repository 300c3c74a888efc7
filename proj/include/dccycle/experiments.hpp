#pragma once

// Experiment orchestration. Every (cell, seed) is trained once; the trained
// pair of generators is then scored in both directions, so one training run
// yields one evaluation run per direction.
//
// Layout under <root>/<plan>/:
//   manifest.json
//   table_a2b.csv, table_b2a.csv          (ablation)
//   sweep_a2b.csv, sweep_b2a.csv, sweep_{mae,psnr,ssim}.png   (beta sweep)
//   <cell>/<seed>/config.resolved, train.csv, metrics_a2b.csv,
//                 metrics_b2a.csv, checkpoint, figures/

#include "dccycle/config.hpp"
#include "dccycle/data.hpp"
#include "dccycle/metrics.hpp"
#include "dccycle/trainer.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dccycle {

struct ExperimentCell {
  std::string label;  // table row label, e.g. "SSIM&CE(w)"
  std::string slug;   // directory name, e.g. "ssim_ce_w"
  LossConfig loss;
  std::optional<double> beta;  // set for sweep cells
};

struct ExperimentPlan {
  std::string name;
  RunConfig base;  // dataset and shared training settings
  std::vector<ExperimentCell> cells;
  std::vector<std::uint64_t> repeat_seeds;
  std::vector<Direction> directions{Direction::x_to_y, Direction::y_to_x};

  /// {mae_mse, ssim_ce} x {dc off, dc on}, in table row order.
  static ExperimentPlan ablation(const RunConfig& base);
  /// ssim_ce with dual contrast at every beta of base.beta_grid.
  static ExperimentPlan beta_sweep(const RunConfig& base);

  /// Cells differ only in their loss settings; seeds and directions nonempty.
  void validate() const;
  bool is_ablation() const;

  std::size_t training_runs() const { return cells.size() * repeat_seeds.size(); }
  /// cells x seeds x directions.
  std::size_t total_runs() const { return training_runs() * directions.size(); }

  /// Resolved configuration of one (cell, seed) run.
  RunConfig run_config(const ExperimentCell& cell, std::uint64_t seed) const;
};

struct ResultsRow {
  std::string cell;
  Direction direction = Direction::x_to_y;
  MetricSummary mae;
  MetricSummary psnr;
  MetricSummary ssim;
  std::size_t repeats = 0;
  bool complete = true;  // false when any seed of the cell failed
};

struct ResultsTable {
  Direction direction = Direction::x_to_y;
  std::vector<ResultsRow> rows;

  /// `cell,mae,psnr,ssim,repeats,status`, metric cells formatted "mean (std)".
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  /// Fixed-width text rendering for the console.
  std::string format() const;
};

/// Seed-level aggregate of a cell: each run contributes the test-set mean of
/// its MetricReport, and the row holds mean and sample std over runs.
ResultsRow aggregate_runs(const std::string& cell, Direction direction, const std::vector<MetricReport>& runs);

struct RunRecord {
  std::string cell;
  std::uint64_t seed = 0;
  std::string run_dir;
  bool ok = false;
  std::string error;
  std::vector<MetricReport> reports;  // one per plan direction when ok
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<ResultsTable> tables;  // one per plan direction
  std::string manifest_path;
};

struct ExperimentOptions {
  std::string root = "runs";
  std::ostream* progress = nullptr;
  bool emit_figures = true;
};

/// Trains and evaluates every cell x seed. A failed run is recorded and its
/// cell marked incomplete; the remaining runs continue.
ExperimentResult run_ablation(const ExperimentPlan& plan, const ExperimentOptions& options = {});

/// Same as run_ablation over the beta grid, plus sweep CSVs (one row per beta)
/// and MAE / PSNR / SSIM line plots with "a2b" and "b2a" series.
ExperimentResult run_beta_sweep(const ExperimentPlan& plan, const ExperimentOptions& options = {});

/// Dataset described by the config (toy corpus, x/ y/ directories or a
/// manifest), with the configured train fraction.
UnpairedDataset load_dataset(const RunConfig& config);

struct SingleRunResult {
  std::string run_dir;
  std::vector<MetricReport> reports;  // a2b, b2a
};

/// Trains one configuration into run_dir (config.resolved, train.csv,
/// checkpoint, metrics_*.csv, figures/, manifest.json).
SingleRunResult run_single(const RunConfig& config, const std::string& run_dir, std::ostream* progress = nullptr,
                           bool emit_figures = true);

/// For every test image and both directions writes
/// `<id>_<direction>_{real,synth,err}.png`; returns the file paths.
template <typename Scalar>
std::vector<std::string> emit_figures(const ModelSet<Scalar>& models, const DatasetView& test,
                                      const std::string& out_dir);

/// Loads a checkpoint at its stored precision and emits figures for the test
/// split of `config`'s dataset at the checkpoint's seed.
std::vector<std::string> emit_figures_from_checkpoint(const std::string& checkpoint_path, const RunConfig& config,
                                                      const std::string& out_dir);

/// Evaluates a checkpoint on the test split of `config`'s dataset at the
/// checkpoint's seed.
MetricReport evaluate_checkpoint(const std::string& checkpoint_path, const RunConfig& config, Direction direction);

}  // namespace dccycle

#include "dccycle/experiments.hpp"

#include "dccycle/checkpoint.hpp"
#include "dccycle/plot.hpp"
#include "dccycle/png_io.hpp"
#include "dccycle/toy_data.hpp"
#include "json_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dccycle {

namespace fs = std::filesystem;

namespace {

constexpr Direction kBothDirections[] = {Direction::x_to_y, Direction::y_to_x};

std::string beta_text(double beta) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", beta);
  return buffer;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json split_json(const DatasetSplit& split) {
  return {{"train_x", split.train.x_indices},
          {"train_y", split.train.y_indices},
          {"test_x", split.test.x_indices},
          {"test_y", split.test.y_indices}};
}

json directions_json(const std::vector<Direction>& directions) {
  json out = json::array();
  for (Direction d : directions) out.push_back(to_string(d));
  return out;
}

void write_json(const fs::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

template <typename Scalar>
std::vector<MetricReport> train_and_score(const RunConfig& config, const UnpairedDataset& dataset,
                                          const std::vector<Direction>& directions, const fs::path& run_dir,
                                          std::ostream* progress, bool figures) {
  const DatasetSplit parts = split(dataset, config.train.seed);
  FitOptions options;
  options.run_dir = run_dir.string();
  options.config_text = config.to_text();
  options.progress = progress;
  options.ssim = config.ssim;
  const FitResult<Scalar> result = fit<Scalar>(parts.train, config.model, config.train, options);

  std::vector<MetricReport> reports;
  for (Direction direction : directions) {
    reports.push_back(evaluate(result.state.models, parts.test, direction, config.ssim));
    reports.back().write_csv((run_dir / ("metrics_" + std::string(to_string(direction)) + ".csv")).string());
  }
  if (figures) emit_figures(result.state.models, parts.test, (run_dir / "figures").string());
  return reports;
}

std::vector<MetricReport> train_and_score(const RunConfig& config, const UnpairedDataset& dataset,
                                          const std::vector<Direction>& directions, const fs::path& run_dir,
                                          std::ostream* progress, bool figures) {
  fs::create_directories(run_dir);
  write_text(run_dir / "config.resolved", config.to_text());
  if (config.precision == "f64") {
    return train_and_score<double>(config, dataset, directions, run_dir, progress, figures);
  }
  return train_and_score<float>(config, dataset, directions, run_dir, progress, figures);
}

ExperimentResult run_plan(const ExperimentPlan& plan, const ExperimentOptions& options) {
  plan.validate();
  const UnpairedDataset dataset = load_dataset(plan.base);
  const fs::path plan_dir = fs::path(options.root) / plan.name;
  fs::create_directories(plan_dir);

  ExperimentResult result;
  json runs = json::array();
  json splits = json::object();
  for (std::uint64_t seed : plan.repeat_seeds) {
    splits[std::to_string(seed)] = split_json(split(dataset, seed));
  }

  auto write_manifest = [&] {
    const std::string base_text = plan.base.to_text();
    json cells = json::array();
    for (const ExperimentCell& cell : plan.cells) {
      json c = {{"label", cell.label}, {"slug", cell.slug}, {"loss", to_json(cell.loss)}};
      if (cell.beta) c["beta"] = *cell.beta;
      cells.push_back(c);
    }
    const json manifest = {{"plan", plan.name},
                           {"kind", plan.is_ablation() ? "ablation" : "beta_sweep"},
                           {"code_version", code_version()},
                           {"config_text", base_text},
                           {"config_hash", content_hash(base_text)},
                           {"cells", cells},
                           {"seeds", plan.repeat_seeds},
                           {"directions", directions_json(plan.directions)},
                           {"training_runs", plan.training_runs()},
                           {"total_runs", plan.total_runs()},
                           {"splits", splits},
                           {"runs", runs}};
    result.manifest_path = (plan_dir / "manifest.json").string();
    write_json(result.manifest_path, manifest);
  };

  for (const ExperimentCell& cell : plan.cells) {
    for (std::uint64_t seed : plan.repeat_seeds) {
      RunRecord record;
      record.cell = cell.label;
      record.seed = seed;
      const fs::path run_dir = plan_dir / cell.slug / std::to_string(seed);
      record.run_dir = run_dir.string();
      if (options.progress != nullptr) *options.progress << "[" << plan.name << "] " << cell.label << " seed " << seed << '\n';
      std::string config_hash;
      try {
        const RunConfig config = plan.run_config(cell, seed);
        config_hash = content_hash(config.to_text());
        record.reports = train_and_score(config, dataset, plan.directions, run_dir, options.progress, options.emit_figures);
        record.ok = true;
      } catch (const std::exception& e) {
        record.error = e.what();
        if (options.progress != nullptr) *options.progress << "  failed: " << record.error << '\n';
      }
      json entry = {{"cell", cell.label}, {"seed", seed}, {"run_dir", record.run_dir},
                    {"status", record.ok ? "complete" : "failed"}, {"config_hash", config_hash}};
      if (!record.ok) entry["error"] = record.error;
      runs.push_back(entry);
      result.runs.push_back(std::move(record));
      write_manifest();
    }
  }

  for (std::size_t d = 0; d < plan.directions.size(); ++d) {
    ResultsTable table;
    table.direction = plan.directions[d];
    for (const ExperimentCell& cell : plan.cells) {
      std::vector<MetricReport> reports;
      bool complete = true;
      for (const RunRecord& run : result.runs) {
        if (run.cell != cell.label) continue;
        if (run.ok) {
          reports.push_back(run.reports[d]);
        } else {
          complete = false;
        }
      }
      ResultsRow row = aggregate_runs(cell.label, table.direction, reports);
      row.complete = complete;
      table.rows.push_back(row);
    }
    result.tables.push_back(std::move(table));
  }
  write_manifest();
  return result;
}

}  // namespace

ExperimentPlan ExperimentPlan::ablation(const RunConfig& base) {
  ExperimentPlan plan;
  plan.name = base.plan_name;
  plan.base = base;
  plan.repeat_seeds = base.repeat_seeds;
  for (LossFamily family : {LossFamily::mae_mse, LossFamily::ssim_ce}) {
    for (bool dc : {false, true}) {
      LossConfig loss = base.train.loss;
      loss.family = family;
      loss.dual_contrast = dc;
      plan.cells.push_back({loss.cell_label(), std::string(to_string(family)) + (dc ? "_w" : "_wo"), loss, std::nullopt});
    }
  }
  return plan;
}

ExperimentPlan ExperimentPlan::beta_sweep(const RunConfig& base) {
  ExperimentPlan plan;
  plan.name = base.plan_name;
  plan.base = base;
  plan.repeat_seeds = base.repeat_seeds;
  for (double beta : base.beta_grid) {
    LossConfig loss = base.train.loss;
    loss.family = LossFamily::ssim_ce;
    loss.dual_contrast = true;
    loss.beta = beta;
    plan.cells.push_back({"beta=" + beta_text(beta), "beta_" + beta_text(beta), loss, beta});
  }
  return plan;
}

void ExperimentPlan::validate() const {
  if (name.empty()) throw std::invalid_argument("plan name is empty");
  if (cells.empty()) throw std::invalid_argument("plan '" + name + "' has no cells");
  if (repeat_seeds.empty()) throw std::invalid_argument("plan '" + name + "' has no repeat seeds");
  if (directions.empty()) throw std::invalid_argument("plan '" + name + "' has no directions");
  for (const ExperimentCell& cell : cells) {
    cell.loss.validate();
    if (cell.slug.empty() || cell.slug.find('/') != std::string::npos) {
      throw std::invalid_argument("cell '" + cell.label + "' has an invalid directory name");
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      if (cells[i].slug == cells[j].slug) throw std::invalid_argument("duplicate cell '" + cells[i].slug + "'");
    }
  }
}

bool ExperimentPlan::is_ablation() const {
  if (cells.size() != 4) return false;
  for (const ExperimentCell& cell : cells) {
    if (cell.beta) return false;
  }
  return true;
}

RunConfig ExperimentPlan::run_config(const ExperimentCell& cell, std::uint64_t seed) const {
  RunConfig config = base;
  config.train.loss = cell.loss;
  config.train.seed = seed;
  config.repeat_seeds = {seed};
  config.resolve();
  return config;
}

ResultsRow aggregate_runs(const std::string& cell, Direction direction, const std::vector<MetricReport>& runs) {
  std::vector<double> mae_values, psnr_values, ssim_values;
  for (const MetricReport& run : runs) {
    mae_values.push_back(run.mae.mean);
    psnr_values.push_back(run.psnr.mean);
    ssim_values.push_back(run.ssim.mean);
  }
  ResultsRow row;
  row.cell = cell;
  row.direction = direction;
  row.repeats = runs.size();
  if (!runs.empty()) {
    row.mae = summarize(mae_values);
    row.psnr = summarize(psnr_values);
    row.ssim = summarize(ssim_values);
  } else {
    row.mae = row.psnr = row.ssim = {std::nan(""), std::nan("")};
  }
  return row;
}

void ResultsTable::write_csv(std::ostream& out) const {
  out << "cell,mae,psnr,ssim,repeats,status\n";
  for (const ResultsRow& row : rows) {
    out << row.cell << ',' << format_mean_std(row.mae) << ',' << format_mean_std(row.psnr) << ','
        << format_mean_std(row.ssim) << ',' << row.repeats << ',' << (row.complete ? "complete" : "incomplete") << '\n';
  }
}

void ResultsTable::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out);
}

std::string ResultsTable::format() const {
  std::ostringstream out;
  out << "direction " << to_string(direction) << '\n';
  out << std::left << std::setw(14) << "cell" << std::setw(22) << "MAE" << std::setw(22) << "PSNR" << std::setw(22)
      << "SSIM" << "n\n";
  for (const ResultsRow& row : rows) {
    out << std::setw(14) << row.cell << std::setw(22) << format_mean_std(row.mae) << std::setw(22)
        << format_mean_std(row.psnr) << std::setw(22) << format_mean_std(row.ssim) << row.repeats
        << (row.complete ? "" : " (incomplete)") << '\n';
  }
  return out.str();
}

ExperimentResult run_ablation(const ExperimentPlan& plan, const ExperimentOptions& options) {
  ExperimentResult result = run_plan(plan, options);
  const fs::path plan_dir = fs::path(options.root) / plan.name;
  for (const ResultsTable& table : result.tables) {
    table.write_csv((plan_dir / ("table_" + std::string(to_string(table.direction)) + ".csv")).string());
  }
  return result;
}

ExperimentResult run_beta_sweep(const ExperimentPlan& plan, const ExperimentOptions& options) {
  for (const ExperimentCell& cell : plan.cells) {
    if (!cell.beta) throw std::invalid_argument("sweep cell '" + cell.label + "' has no beta");
  }
  ExperimentResult result = run_plan(plan, options);
  const fs::path plan_dir = fs::path(options.root) / plan.name;

  std::vector<PlotSeries> mae_series, psnr_series, ssim_series;
  for (const ResultsTable& table : result.tables) {
    const std::string dir = to_string(table.direction);
    std::ofstream out(plan_dir / ("sweep_" + dir + ".csv"), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write sweep table in " + plan_dir.string());
    out << "beta,mae_mean,mae_std,psnr_mean,psnr_std,ssim_mean,ssim_std,repeats,status\n";
    out << std::setprecision(17);
    PlotSeries mae_s{dir, {}, {}}, psnr_s{dir, {}, {}}, ssim_s{dir, {}, {}};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const ResultsRow& row = table.rows[i];
      const double beta = *plan.cells[i].beta;
      out << beta << ',' << row.mae.mean << ',' << row.mae.std << ',' << row.psnr.mean << ',' << row.psnr.std << ','
          << row.ssim.mean << ',' << row.ssim.std << ',' << row.repeats << ','
          << (row.complete ? "complete" : "incomplete") << '\n';
      mae_s.x.push_back(beta), mae_s.y.push_back(row.mae.mean);
      psnr_s.x.push_back(beta), psnr_s.y.push_back(row.psnr.mean);
      ssim_s.x.push_back(beta), ssim_s.y.push_back(row.ssim.mean);
    }
    mae_series.push_back(mae_s);
    psnr_series.push_back(psnr_s);
    ssim_series.push_back(ssim_s);
  }
  write_line_plot((plan_dir / "sweep_mae.png").string(), "MAE vs beta", "beta", "MAE", mae_series);
  write_line_plot((plan_dir / "sweep_psnr.png").string(), "PSNR vs beta", "beta", "PSNR (dB)", psnr_series);
  write_line_plot((plan_dir / "sweep_ssim.png").string(), "SSIM vs beta", "beta", "SSIM", ssim_series);
  return result;
}

UnpairedDataset load_dataset(const RunConfig& config) {
  const Index size = config.model.generator.input_size;
  UnpairedDataset dataset;
  if (config.data.source == "toy") {
    dataset = make_toy_dataset({config.data.toy_count, size, config.data.toy_seed, config.data.toy_gamma});
  } else if (config.data.source == "dir") {
    dataset = ingest((fs::path(config.data.path) / "x").string(), (fs::path(config.data.path) / "y").string(), size);
  } else if (config.data.source == "manifest") {
    dataset = ingest_manifest(config.data.path, size);
  } else {
    throw ConfigError("data_source", "unknown source '" + config.data.source + "'");
  }
  dataset.train_fraction = config.data.train_fraction;
  return dataset;
}

SingleRunResult run_single(const RunConfig& config, const std::string& run_dir, std::ostream* progress,
                           bool emit_figures) {
  const UnpairedDataset dataset = load_dataset(config);
  const std::vector<Direction> directions(std::begin(kBothDirections), std::end(kBothDirections));
  SingleRunResult result{run_dir, train_and_score(config, dataset, directions, run_dir, progress, emit_figures)};
  const std::string text = config.to_text();
  const json manifest = {{"plan", config.plan_name},
                         {"kind", "train"},
                         {"code_version", code_version()},
                         {"config_text", text},
                         {"config_hash", content_hash(text)},
                         {"seeds", {config.train.seed}},
                         {"directions", directions_json(directions)},
                         {"training_runs", 1},
                         {"total_runs", directions.size()},
                         {"splits", {{std::to_string(config.train.seed), split_json(split(dataset, config.train.seed))}}}};
  write_json(fs::path(run_dir) / "manifest.json", manifest);
  return result;
}

template <typename Scalar>
std::vector<std::string> emit_figures(const ModelSet<Scalar>& models, const DatasetView& test,
                                      const std::string& out_dir) {
  fs::create_directories(out_dir);
  const UnpairedDataset& dataset = *test.dataset;
  std::vector<std::string> files;
  for (Direction direction : kBothDirections) {
    const Network<Scalar>& generator = direction == Direction::x_to_y ? models.g : models.f;
    const auto& targets = direction == Direction::x_to_y ? dataset.domain_y : dataset.domain_x;
    for (const SyntheticImage& synthetic : synthesize_test_set(generator, test, direction)) {
      const std::size_t partner = paired_target(dataset, direction, synthetic.source_index);
      if (partner == static_cast<std::size_t>(-1)) {
        throw std::runtime_error("figures need paired test images; '" + synthetic.id + "' has no partner");
      }
      const Grid<double> real = targets[partner].to_metric().pixels();
      const Grid<double> synth = synthetic.image.to_metric().pixels();
      const Grid<double> err = (quantize8(real) - quantize8(synth)).cwiseAbs() / 255.0;
      const std::string stem = (fs::path(out_dir) / (synthetic.id + "_" + to_string(direction))).string();
      write_png8(stem + "_real.png", real);
      write_png8(stem + "_synth.png", synth);
      write_png8(stem + "_err.png", err);
      files.push_back(stem + "_real.png");
      files.push_back(stem + "_synth.png");
      files.push_back(stem + "_err.png");
    }
  }
  return files;
}

template std::vector<std::string> emit_figures(const ModelSet<float>&, const DatasetView&, const std::string&);
template std::vector<std::string> emit_figures(const ModelSet<double>&, const DatasetView&, const std::string&);

std::vector<std::string> emit_figures_from_checkpoint(const std::string& checkpoint_path, const RunConfig& config,
                                                      const std::string& out_dir) {
  const CheckpointInfo info = read_checkpoint_info(checkpoint_path);
  const UnpairedDataset dataset = load_dataset(config);
  const DatasetSplit parts = split(dataset, info.seed);
  if (info.scalar == "f64") return emit_figures(load_checkpoint<double>(checkpoint_path).models, parts.test, out_dir);
  return emit_figures(load_checkpoint<float>(checkpoint_path).models, parts.test, out_dir);
}

MetricReport evaluate_checkpoint(const std::string& checkpoint_path, const RunConfig& config, Direction direction) {
  const CheckpointInfo info = read_checkpoint_info(checkpoint_path);
  const UnpairedDataset dataset = load_dataset(config);
  const DatasetSplit parts = split(dataset, info.seed);
  if (info.scalar == "f64") {
    return evaluate(load_checkpoint<double>(checkpoint_path).models, parts.test, direction, config.ssim);
  }
  return evaluate(load_checkpoint<float>(checkpoint_path).models, parts.test, direction, config.ssim);
}

}  // namespace dccycle

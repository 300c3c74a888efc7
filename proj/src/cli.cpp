#include "dccycle/cli.hpp"

#include "dccycle/checkpoint.hpp"
#include "dccycle/config.hpp"
#include "dccycle/experiments.hpp"
#include "dccycle/toy_data.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace dccycle {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* sub, CommonOptions& common) {
  sub->add_option("--config", common.config_path, "key = value configuration file");
  sub->add_option("--seed", common.seed, "master seed (overrides the config)");
  sub->add_option("--set", common.overrides, "extra key=value override, repeatable");
}

RunConfig resolve_config(const CommonOptions& common, const std::string& fallback_text = "") {
  RunConfig config = !common.config_path.empty() ? load_config_file(common.config_path)
                     : !fallback_text.empty()    ? parse_config_text(fallback_text)
                                                 : RunConfig::toy();
  for (const std::string& entry : common.overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError(entry, "override must be key=value");
    std::string key = entry.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    config.set(key, entry.substr(eq + 1));
  }
  if (common.seed) {
    config.train.seed = *common.seed;
    config.repeat_seeds = {*common.seed};
  }
  config.resolve();
  return config;
}

void print_tables(std::ostream& out, const ExperimentResult& result) {
  for (const ResultsTable& table : result.tables) out << table.format() << '\n';
  std::size_t failed = 0;
  for (const RunRecord& run : result.runs) failed += run.ok ? 0 : 1;
  if (failed > 0) out << failed << " run(s) failed; see " << result.manifest_path << '\n';
  out << "manifest: " << result.manifest_path << '\n';
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DC-cycleGAN: bidirectional unpaired image translation", "dccycle"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_path = "runs";
  std::string checkpoint_path;
  std::string direction_text = "a2b";
  std::size_t toy_n = 50;
  Index toy_size = 64;
  std::uint64_t toy_seed = 0;
  double toy_gamma = 1.5;

  CLI::App* train = app.add_subcommand("train", "train one configuration and score both directions");
  add_common(train, common);
  train->add_option("--out", out_path, "runs root directory");

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a checkpoint on its test split");
  add_common(evaluate_cmd, common);
  evaluate_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  evaluate_cmd->add_option("--direction", direction_text, "a2b or b2a");
  std::string metrics_out;
  evaluate_cmd->add_option("--out", metrics_out, "metrics CSV path (default: next to the checkpoint)");

  CLI::App* ablate = app.add_subcommand("ablate", "four-cell loss ablation over the repeat seeds");
  add_common(ablate, common);
  ablate->add_option("--out", out_path, "runs root directory");

  CLI::App* sweep = app.add_subcommand("sweep", "beta sensitivity sweep");
  add_common(sweep, common);
  sweep->add_option("--out", out_path, "runs root directory");

  CLI::App* figures = app.add_subcommand("figures", "real / synthetic / error-map PNGs for a checkpoint");
  add_common(figures, common);
  figures->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  figures->add_option("--out", out_path, "output directory")->required();

  CLI::App* toy = app.add_subcommand("make-toy-data", "write the synthetic two-modality corpus");
  toy->add_option("--n", toy_n, "images per domain")->check(CLI::PositiveNumber);
  toy->add_option("--size", toy_size, "image side")->check(CLI::PositiveNumber);
  toy->add_option("--seed", toy_seed, "generator seed");
  toy->add_option("--gamma", toy_gamma, "gamma of the Y transform");
  toy->add_option("--out", out_path, "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Direction direction = Direction::x_to_y;
  try {
    direction = parse_direction(direction_text);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      const RunConfig config = resolve_config(common);
      const std::string cell = std::string(to_string(config.train.loss.family)) +
                               (config.train.loss.dual_contrast ? "_w" : "_wo");
      const fs::path run_dir = fs::path(out_path) / config.plan_name / cell / std::to_string(config.train.seed);
      const SingleRunResult result = run_single(config, run_dir.string(), &out);
      out << "a2b " << format_mean_std(result.reports[0].ssim) << " SSIM, b2a " << format_mean_std(result.reports[1].ssim)
          << " SSIM\nrun directory: " << result.run_dir << '\n';
    } else if (evaluate_cmd->parsed()) {
      const CheckpointInfo info = read_checkpoint_info(checkpoint_path);
      const RunConfig config = resolve_config(common, info.config_text);
      const MetricReport report = evaluate_checkpoint(checkpoint_path, config, direction);
      if (metrics_out.empty()) {
        metrics_out = (fs::path(checkpoint_path).parent_path() / ("metrics_" + direction_text + ".csv")).string();
      }
      report.write_csv(metrics_out);
      out << direction_text << " MAE " << format_mean_std(report.mae) << " PSNR " << format_mean_std(report.psnr)
          << " SSIM " << format_mean_std(report.ssim) << "\nmetrics: " << metrics_out << '\n';
    } else if (ablate->parsed()) {
      const RunConfig config = resolve_config(common);
      print_tables(out, run_ablation(ExperimentPlan::ablation(config), {out_path, &out, true}));
    } else if (sweep->parsed()) {
      RunConfig config = resolve_config(common);
      print_tables(out, run_beta_sweep(ExperimentPlan::beta_sweep(config), {out_path, &out, true}));
    } else if (figures->parsed()) {
      const CheckpointInfo info = read_checkpoint_info(checkpoint_path);
      const RunConfig config = resolve_config(common, info.config_text);
      const auto files = emit_figures_from_checkpoint(checkpoint_path, config, out_path);
      out << "wrote " << files.size() << " PNG files to " << out_path << '\n';
    } else if (toy->parsed()) {
      write_toy_dataset({toy_n, toy_size, toy_seed, toy_gamma}, out_path);
      out << "wrote " << toy_n << " X and " << toy_n << " Y images to " << out_path << '\n';
    }
  } catch (const ConfigError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitSuccess;
}

}  // namespace dccycle

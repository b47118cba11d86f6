#include "rnnbelief/cli/cli.hpp"

#include <cstdlib>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace rnnbelief::cli {

std::filesystem::path resolve_out(const std::string& dir) {
  std::filesystem::path p(dir);
  if (const char* root = std::getenv(kOutRootVar); root && *root && p.is_relative())
    return std::filesystem::path(root) / p;
  return p;
}

experiment::RunConfig load_with_overrides(const CliCommand& cmd) {
  if (!std::filesystem::exists(cmd.config_path)) throw MissingConfigError("config not found: " + cmd.config_path);
  experiment::RunConfig cfg = experiment::load_config(cmd.config_path);
  if (cmd.seed) cfg.seeds = {*cmd.seed};
  if (cmd.cell) {
    try {
      cfg.cell = nn::parse_cell(*cmd.cell);
    } catch (const Error& e) {
      throw ConfigError("--cell", e.what());
    }
  }
  if (cmd.cadence) cfg.evaluation.cadence = *cmd.cadence;
  if (!cmd.out.empty()) cfg.output_dir = cmd.out;
  cfg.validate();
  return cfg;
}

int report(const CliCommand& cmd, std::ostream& out) {
  std::vector<experiment::MetricsRow> rows;
  std::vector<std::string> inputs = cmd.csv;
  const std::filesystem::path dir = resolve_out(cmd.out.empty() ? "." : cmd.out);
  if (inputs.empty()) inputs.push_back((dir / "metrics.csv").string());
  for (const std::string& path : inputs) {
    auto part = experiment::read_metrics(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string table = experiment::format_correlations(experiment::correlation_report(rows));
  out << table;
  if (!cmd.out.empty()) {
    experiment::write_file_atomic(dir / "correlations.csv", table);
    experiment::write_file_atomic(dir / "summary.csv", experiment::format_summary(rows));
  }
  return 0;
}

int dispatch(const CliCommand& cmd, std::ostream& out) {
  if (cmd.subcommand == "report") return report(cmd, out);
  const experiment::RunConfig cfg = load_with_overrides(cmd);
  if (cmd.subcommand == "validate-config") {
    out << experiment::resolved_config_json(cfg).dump(2) << "\n";
    return 0;
  }
  const std::filesystem::path root = resolve_out(cfg.output_dir);
  std::filesystem::create_directories(root);
  if (cmd.subcommand == "train") {
    const auto rows = experiment::run_train(cfg, root, cmd.workers);
    out << (root / "metrics.csv").string() << " (" << rows.size() << " rows)\n";
  } else if (cmd.subcommand == "eval-mi") {
    const auto rows = experiment::run_eval_mi(cfg, root, cmd.workers);
    out << (root / "mi.csv").string() << " (" << rows.size() << " rows)\n";
  } else {
    const auto rows = experiment::run_sweep(cfg, root, cmd.workers);
    out << (root / "generalization.csv").string() << " (" << rows.size() << " rows)\n";
  }
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrent Q-learning with belief mutual-information probes", "rnnbelief"};
  app.require_subcommand(1);
  CliCommand cmd;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  const auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", cmd.config_path, "JSON run configuration")->required();
    sub->add_option("--out", cmd.out, "output directory, overrides output_dir (relative paths resolve under $" +
                                          std::string(kOutRootVar) + " when set)");
    sub->add_option("--seed", cmd.seed, "run this single seed instead of the config's seed list");
    sub->add_option("--cell", cmd.cell, "cell kind: lstm, gru, brc, nbrc or mgu");
    sub->add_option("--workers", cmd.workers, "seeds processed in parallel")->check(CLI::PositiveNumber);
    sub->add_option("--cadence", cmd.cadence, "episodes between evaluated checkpoints");
  };
  add_run_flags(app.add_subcommand("train", "train and evaluate every cadence"));
  add_run_flags(app.add_subcommand("eval-mi", "recompute MI estimates from stored checkpoints"));
  add_run_flags(app.add_subcommand("sweep-generalization", "MI under epsilon-greedy behavior policies"));
  CLI::App* validate = app.add_subcommand("validate-config", "check a config and print it resolved");
  validate->add_option("--config", cmd.config_path, "JSON run configuration")->required();
  validate->add_option("--out", cmd.out, "output directory, overrides output_dir");
  validate->add_option("--seed", cmd.seed, "single seed override");
  validate->add_option("--cell", cmd.cell, "cell kind override");
  validate->add_option("--cadence", cmd.cadence, "evaluation cadence override");
  CLI::App* rep = app.add_subcommand("report", "correlation table (stdout) and summary CSVs");
  rep->add_option("--csv", cmd.csv, "metrics CSV files; defaults to <out>/metrics.csv")->check(CLI::ExistingFile);
  rep->add_option("--out", cmd.out, "directory receiving correlations.csv and summary.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }
  for (CLI::App* sub : app.get_subcommands()) cmd.subcommand = sub->get_name();

  auto logger = spdlog::stderr_color_mt("rnnbelief");
  logger->set_level(spdlog::level::from_str(log_level));
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  int code = 0;
  try {
    code = dispatch(cmd, out);
  } catch (const ConfigError& e) {
    err << "error: invalid config: " << e.what() << "\n";
    code = 2;
  } catch (const MissingConfigError& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  }
  spdlog::set_default_logger(previous);
  spdlog::drop(logger->name());
  return code;
}

}  // namespace rnnbelief::cli

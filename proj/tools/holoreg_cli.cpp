#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "holoreg/errors.hpp"
#include "holoreg/experiments.hpp"
#include "holoreg/report.hpp"

namespace {

namespace fs = std::filesystem;
using holoreg::ExperimentConfig;
using holoreg::SimReport;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::int64_t seed = -1;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (default from config)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--jobs", args.jobs, "worker count for sweeps");
  cmd->add_option("--format", args.format, "structured | tabular");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  ExperimentConfig config = ExperimentConfig::load(args.config_path);
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (args.jobs > 0) config.jobs = args.jobs;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (!args.format.empty()) {
    if (args.format != "structured" && args.format != "tabular")
      throw holoreg::ConfigError("format must be structured or tabular");
    config.format = args.format;
  }
  return config;
}

int emit(SimReport& report, const ExperimentConfig& config, double wall_ms) {
  report.set_wall_clock_ms(wall_ms);
  fs::create_directories(config.out_dir);
  const std::string stem = fs::path(config.source_path).stem().string();
  const std::string path = (fs::path(config.out_dir) / (stem + ".report.json")).string();
  report.write(path, config.format == "tabular");
  std::cout << "report: " << path << "\n";

  const auto& results = report.results();
  if (results.contains("roundtrip_fidelity"))
    std::cout << "round-trip fidelity = " << results["roundtrip_fidelity"].get<double>() << "\n";
  if (results.contains("bell_fidelity"))
    std::cout << "bell fidelity = " << results["bell_fidelity"].get<double>() << "\n";
  if (results.contains("slope"))
    std::cout << "slope = " << results["slope"].get<double>() << " +- "
              << results["slope_stderr"].get<double>() << "\n";
  if (results.contains("max_off_diagonal"))
    std::cout << "max |gram| off-diagonal = " << results["max_off_diagonal"].get<double>()
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulse-level simulator of a spin-ensemble holographic quantum register"};
  app.require_subcommand(1);

  CommonArgs overlap_args, simulate_args, sweep_args, validate_args;
  auto* overlap = app.add_subcommand("overlap", "mode-overlap tables and register Gram");
  add_common(overlap, overlap_args);
  auto* simulate = app.add_subcommand("simulate", "run a compiled program on an engine");
  add_common(simulate, simulate_args);
  auto* sweep = app.add_subcommand("sweep", "scaling sweeps with log-log fits");
  add_common(sweep, sweep_args);
  auto* validate = app.add_subcommand("validate", "validate a config (and optional report)");
  add_common(validate, validate_args);
  std::string report_path;
  validate->add_option("--report", report_path, "report file to schema-check");

  CLI11_PARSE(app, argc, argv);

  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
        .count();
  };

  try {
    if (overlap->parsed()) {
      const ExperimentConfig config = load_with_overrides(overlap_args);
      SimReport report = holoreg::cmd_overlap(config);
      return emit(report, config, elapsed_ms());
    }
    if (simulate->parsed()) {
      const ExperimentConfig config = load_with_overrides(simulate_args);
      SimReport report = holoreg::cmd_simulate(config);
      return emit(report, config, elapsed_ms());
    }
    if (sweep->parsed()) {
      const ExperimentConfig config = load_with_overrides(sweep_args);
      SimReport report = holoreg::cmd_sweep(config);
      return emit(report, config, elapsed_ms());
    }
    if (validate->parsed()) {
      const ExperimentConfig config = load_with_overrides(validate_args);
      (void)config;
      if (!report_path.empty())
        SimReport::validate_schema(SimReport::read_file(report_path));
      std::cout << "ok\n";
      return 0;
    }
  } catch (const holoreg::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const holoreg::SimulationError& err) {
    std::cerr << "simulation error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}

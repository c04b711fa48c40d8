#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dhmc/app/commands.hpp"
#include "dhmc/app/io.hpp"

namespace fs = std::filesystem;
using namespace dhmc::app;

namespace {

void fail_line(const std::string& what) {
  std::string line = what;
  for (auto& ch : line) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "dhmc: error: " << line << '\n';
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  throw dhmc::ConfigError("--format", "expected csv or jsonl, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discontinuous HMC sampling and benchmarking"};
  app.require_subcommand(1);

  std::string config, out, format, kind = "";
  std::size_t chains = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> dirs;
  PlotOptions plot;

  auto* run = app.add_subcommand("run", "Run warmup and sampling for every chain");
  run->add_option("--config", config, "Run config (JSON)")->required();
  auto* run_out = run->add_option("--out", out, "Output directory (overrides output_dir)");
  auto* run_chains = run->add_option("--chains", chains, "Number of chains");
  auto* run_seed = run->add_option("--seed", seed, "Master seed");
  auto* run_fmt = run->add_option("--format", format, "Artifact format: csv or jsonl");

  auto* diag = app.add_subcommand("diagnose", "Write ess.json for a run directory");
  diag->add_option("run_dir", dirs, "Run directory")->required()->expected(1);

  auto* cmp = app.add_subcommand("compare", "Tabulate ESS and cost across runs of one model");
  cmp->add_option("run_dirs", dirs, "Run directories")->required()->expected(2, -1);
  cmp->add_option("--out", out, "Directory for compare.csv")->default_val(".");

  auto* plt = app.add_subcommand("plotdata", "Emit plot-ready CSV");
  plt->add_option("run_dir", dirs, "Run directory")->expected(0, 1);
  plt->add_option("--kind", kind, "trajectory, marginal2d or funcdraws")->required();
  plt->add_option("--config", config, "Config for a trajectory dump without a run");
  plt->add_option("--out", out, "Output directory")->default_val(".");
  plt->add_option("--x", plot.x, "marginal2d horizontal column");
  plt->add_option("--y", plot.y, "marginal2d vertical column");
  plt->add_option("--bins", plot.bins, "marginal2d bins per axis")->default_val(40);
  plt->add_option("--draws", plot.draws, "funcdraws draw count")->default_val(50);

  auto* syn = app.add_subcommand("synth", "Simulate the dataset a config describes");
  syn->add_option("--config", config, "Run config (JSON)")->required();
  syn->add_option("--out", out, "Dataset CSV; the planted values go to <stem>.truth.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line(e.what());
    return kExitConfig;
  }

  try {
    if (*run) {
      RunOverrides o;
      if (*run_out) o.out = out;
      if (*run_chains) o.chains = chains;
      if (*run_seed) o.seed = seed;
      if (*run_fmt) o.format = parse_format(format);
      const fs::path dir = cmd_run(fs::path(config), o);
      std::cout << dir.string() << '\n';
    } else if (*diag) {
      const Json j = cmd_diagnose(dirs.front());
      std::cout << (fs::path(dirs.front()) / "ess.json").string() << '\n';
      (void)j;
    } else if (*cmp) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      cmd_compare(paths, out, std::cout);
    } else if (*plt) {
      fs::path file;
      if (!config.empty()) {
        if (kind != "trajectory") throw dhmc::ConfigError("--config", "only the trajectory kind runs from a config");
        fs::create_directories(out);
        file = dump_trajectory(load_run_config(config), fs::path(out) / "trajectory.csv");
      } else {
        if (dirs.empty()) throw dhmc::ConfigError("run_dir", "give a run directory or --config");
        file = cmd_plotdata(dirs.front(), kind, out, plot);
      }
      std::cout << file.string() << '\n';
    } else if (*syn) {
      cmd_synth(load_run_config(config), out);
      std::cout << out << '\n';
    }
  } catch (const std::exception& e) {
    fail_line(e.what());
    return exit_code(e);
  }
  return 0;
}

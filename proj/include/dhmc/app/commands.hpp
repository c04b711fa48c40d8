#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dhmc/app/config.hpp"
#include "dhmc/diagnostics.hpp"
#include "dhmc/store.hpp"

namespace dhmc::app {

inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Maps a library exception to the CLI exit status.
int exit_code(const std::exception& e);

struct RunOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> chains;
  std::optional<std::uint64_t> seed;
  std::optional<Format> format;
  // Worker cap; unset reads DHMC_MAX_WORKERS, then the hardware default.
  std::optional<std::size_t> max_workers;
};

// Sampler settings and start point after applying the config's mass,
// partition and init. ConfigError when they do not fit the model.
struct ResolvedRun {
  SamplerConfig sampler;
  std::vector<double> init;
};
ResolvedRun resolve_run(const RunConfig& cfg, const TargetModel& model);

// Writes config.json, samples, trace, report.json and manifest.json into the
// output directory (plus truth.json for simulated datasets). Returns the directory.
std::filesystem::path cmd_run(const RunConfig& cfg, const RunOverrides& overrides = {});
std::filesystem::path cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides = {});

// Draws of a finished run, split per chain.
struct RunArtifacts {
  RunConfig config;
  Json manifest;
  std::vector<SampleStore> chains;
  std::vector<std::size_t> total_evals;     // per chain, post-warmup
  std::vector<std::size_t> iterations;      // per chain, post-warmup transitions
  std::vector<double> mean_path_len;        // per chain
};

// DataError when a required artifact is missing or malformed.
RunArtifacts load_run(const std::filesystem::path& run_dir);

// Writes ess.json into the run dir and returns its content.
Json cmd_diagnose(const std::filesystem::path& run_dir);

struct CompareRow {
  std::string label;
  std::string kernel;
  std::size_t chains = 0;
  double min_ess = 0.0;
  double ess_per_100 = 0.0;
  double ess_per_1e6_evals = 0.0;
  double mean_path_len = 0.0;
  double evals_per_iter = 0.0;
  double relative_cost = 0.0;
};

// Rows sorted by min ESS, descending. ConfigError when the runs target different models.
std::vector<CompareRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs);
// Writes compare.csv into out_dir and the aligned table to `table`.
std::vector<CompareRow> cmd_compare(const std::vector<std::filesystem::path>& run_dirs,
                                    const std::filesystem::path& out_dir, std::ostream& table);

struct PlotOptions {
  std::string x, y;
  std::size_t bins = 40;
  std::size_t draws = 50;
};

// kind is trajectory, marginal2d or funcdraws. Returns the written file.
std::filesystem::path cmd_plotdata(const std::filesystem::path& run_dir, const std::string& kind,
                                   const std::filesystem::path& out_dir, const PlotOptions& opts = {});
// Trajectory dump straight from a config, without a prior run.
std::filesystem::path dump_trajectory(const RunConfig& cfg, const std::filesystem::path& out_file);

// Writes the simulated dataset of cfg.model to `out_file` and the planted values
// to the sidecar <stem>.truth.json.
void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_file);

}  // namespace dhmc::app

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/samplers.hpp"
#include "json.hpp"

namespace dhmc::app {

using Json = nlohmann::json;

enum class Format { csv, jsonl };

struct ModelSpec {
  std::string name;
  Json params = Json::object();
  // Resolved against the config file's directory.
  std::optional<std::filesystem::path> data;
  // Seeds the synthetic dataset when `data` is unset.
  std::uint64_t synth_seed = 1;
};

struct RunConfig {
  ModelSpec model;
  SamplerConfig sampler;
  std::size_t chains = 1;
  std::filesystem::path output_dir = "run";
  Format format = Format::csv;
  std::optional<std::vector<double>> init;
  // Diagonal mass; one entry is broadcast to every coordinate.
  std::vector<double> mass_diag;
  // Discontinuous block for the dhmc kernel; the rest is smooth.
  std::optional<std::vector<std::size_t>> disc_coords;
  // Columns the ESS report covers; empty means every value column.
  std::vector<std::string> ess_columns;
  std::size_t batches = 25;
};

// Strict: unknown keys and out-of-range values throw ConfigError naming the key.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical JSON form with every default filled in; used for the config hash.
Json to_json(const RunConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);

struct BuiltModel {
  std::shared_ptr<const TargetModel> model;
  // Planted parameters when the dataset was simulated; null otherwise.
  Json truth;
  // Writes the simulated dataset in the format the loader reads; empty for
  // targets without a dataset or when the data came from a file.
  std::function<void(const std::filesystem::path&)> save_data;
};

// DataError for unreadable or inconsistent data, ConfigError for bad parameters.
BuiltModel build_model(const ModelSpec& spec);

std::vector<std::string> model_names();

}  // namespace dhmc::app

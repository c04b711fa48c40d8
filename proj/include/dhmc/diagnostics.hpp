#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dhmc/store.hpp"

namespace dhmc {

inline constexpr std::size_t kDefaultBatches = 25;

// n Var(x) / (batch size * Var(batch means)) over the last
// batches * floor(n / batches) draws; the remainder is dropped from the head.
double batch_means_ess(std::span<const double> x, std::size_t batches = kDefaultBatches);

struct ParamEss {
  std::string name;
  double ess_mean = 0.0;
  double ess_second = 0.0;
  double min() const { return ess_mean < ess_second ? ess_mean : ess_second; }
};

struct EssReport {
  std::vector<ParamEss> params;
  std::vector<std::string> excluded;  // constant or otherwise undefined columns
  std::size_t n = 0;
  std::size_t batch_count = kDefaultBatches;
  double min_ess = 0.0;
  std::string min_param;
  std::size_t total_evals = 0;
  double ess_per_eval = 0.0;
};

// Value columns (decoded ordinals for embedded coordinates) when `selector` is empty.
std::vector<std::string> default_selector(const SampleStore& store);

EssReport min_ess_report(const SampleStore& store, const std::vector<std::string>& selector,
                         std::size_t total_evals, std::size_t batches = kDefaultBatches);

struct EssInterval {
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct EssSummary {
  std::size_t chains = 0;
  // Per parameter, chain-averaged ESS of each moment.
  std::vector<std::string> names;
  std::vector<EssInterval> mean_moment;
  std::vector<EssInterval> second_moment;
  // Smallest chain-averaged ESS over parameters and moments, with its interval.
  EssInterval min_ess;
  std::string min_param;
  EssInterval ess_per_eval;
};

// Mean and +-1.96 sd across chains. Requires at least two reports with matching parameters.
EssSummary summarize(const std::vector<EssReport>& reports);

}  // namespace dhmc

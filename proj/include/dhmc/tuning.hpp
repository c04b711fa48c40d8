#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dhmc/core.hpp"

namespace dhmc {

struct KernelTrace;

// Streaming mean and variance (Welford).
class RunningMoments {
 public:
  void push(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 with fewer than two observations.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct TuneState {
  double log_eps = 0.0;
  double target_stat = 0.8;
  std::size_t iteration = 0;
  std::vector<RunningMoments> moments;

  TuneState() = default;
  TuneState(double eps0, double target, std::size_t dim = 0);
};

// 1 - flips / coordinate updates, aggregated over the traces by totals.
double flip_statistic(std::span<const KernelTrace> traces);
double flip_statistic(std::size_t flips, std::size_t coord_updates);

// Robbins-Monro step: log_eps += t^-0.6 (observed - target).
TuneState adapt_stepsize(TuneState ts, double observed_stat);

struct MassEstimate {
  MassSpec mass;
  // Coordinates whose draws were constant and fell back to unit mass.
  std::vector<std::size_t> constant_coords;
};

// m_j = sd_j^-1 on the discontinuous block, M_ii = var_i^-1 on the smooth
// block, both floored at 1e-8. `draws` holds one row per iteration.
MassEstimate estimate_mass(const std::vector<std::vector<double>>& draws, const Partition& part);
MassEstimate estimate_mass(std::span<const RunningMoments> moments, const Partition& part);

}  // namespace dhmc

#include "dhmc/tuning.hpp"

#include <algorithm>
#include <cmath>

#include "dhmc/samplers.hpp"

namespace dhmc {

void RunningMoments::push(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

TuneState::TuneState(double eps0, double target, std::size_t dim)
    : log_eps(std::log(eps0)), target_stat(target), moments(dim) {
  if (!(eps0 > 0.0)) throw ContractError("initial stepsize must be positive");
  if (!(target > 0.0 && target < 1.0)) throw ContractError("target statistic must lie in (0, 1)");
}

double flip_statistic(std::size_t flips, std::size_t coord_updates) {
  if (coord_updates == 0) throw UndefinedStatistic("flip statistic needs at least one coordinate update");
  return 1.0 - static_cast<double>(flips) / static_cast<double>(coord_updates);
}

double flip_statistic(std::span<const KernelTrace> traces) {
  std::size_t flips = 0, updates = 0;
  for (const auto& t : traces) {
    flips += t.flips;
    updates += t.coord_updates;
  }
  return flip_statistic(flips, updates);
}

TuneState adapt_stepsize(TuneState ts, double observed_stat) {
  if (!(observed_stat >= 0.0 && observed_stat <= 1.0)) {
    throw ContractError("observed statistic must lie in [0, 1]");
  }
  ++ts.iteration;
  const double rate = std::pow(static_cast<double>(ts.iteration), -0.6);
  ts.log_eps += rate * (observed_stat - ts.target_stat);
  return ts;
}

namespace {

constexpr double kMassFloor = 1e-8;
constexpr double kMassCeil = 1e8;

MassEstimate from_variances(const std::vector<double>& var, const Partition& part) {
  MassEstimate est;
  est.mass.diag.assign(part.dim(), 1.0);
  auto set = [&](std::size_t i, double m) {
    if (var[i] <= 0.0) {
      est.constant_coords.push_back(i);
      return;
    }
    est.mass.diag[i] = std::clamp(m, kMassFloor, kMassCeil);
  };
  for (auto i : part.smooth) set(i, 1.0 / var[i]);
  for (auto j : part.disc) set(j, 1.0 / std::sqrt(var[j]));
  std::sort(est.constant_coords.begin(), est.constant_coords.end());
  return est;
}

}  // namespace

MassEstimate estimate_mass(std::span<const RunningMoments> moments, const Partition& part) {
  if (moments.size() != part.dim()) throw ContractError("moment accumulators do not match the partition");
  std::vector<double> var(moments.size());
  for (std::size_t i = 0; i < moments.size(); ++i) {
    if (moments[i].count() < 10) throw ContractError("mass estimation needs at least 10 draws");
    var[i] = moments[i].variance();
  }
  return from_variances(var, part);
}

MassEstimate estimate_mass(const std::vector<std::vector<double>>& draws, const Partition& part) {
  if (draws.size() < 10) throw ContractError("mass estimation needs at least 10 draws");
  std::vector<RunningMoments> moments(part.dim());
  for (const auto& row : draws) {
    if (row.size() != part.dim()) throw ContractError("draw length does not match the partition");
    for (std::size_t i = 0; i < row.size(); ++i) moments[i].push(row[i]);
  }
  return estimate_mass(moments, part);
}

}  // namespace dhmc

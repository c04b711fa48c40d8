#include "dhmc/models/toy.hpp"

#include <cmath>

namespace dhmc::models {

namespace {

std::vector<double> checked_pmf(std::vector<double> pmf) {
  if (pmf.empty()) throw ContractError("pmf must have at least one state");
  for (double w : pmf) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ContractError("pmf weights must be positive");
  }
  return pmf;
}

EmbeddingMap grid_map(double cell, double half_width) {
  if (!(cell > 0.0) || !(half_width > cell)) throw ContractError("invalid banana grid");
  const auto cells = static_cast<std::size_t>(std::llround(2.0 * half_width / cell));
  std::vector<double> knots(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) knots[k] = -half_width + cell * static_cast<double>(k);
  return EmbeddingMap::custom(std::move(knots), 0);
}

}  // namespace

GaussianTarget::GaussianTarget(std::vector<double> sd) : sd_(std::move(sd)) {
  if (sd_.empty()) throw ContractError("gaussian target needs dimension >= 1");
  for (double s : sd_) {
    if (!(s > 0.0)) throw ContractError("gaussian scales must be positive");
  }
}

double GaussianTarget::potential(std::span<const double> theta) const {
  double u = 0.0;
  for (std::size_t i = 0; i < sd_.size(); ++i) u += 0.5 * theta[i] * theta[i] / (sd_[i] * sd_[i]);
  return u;
}

void GaussianTarget::gradient(std::span<const double> theta, std::span<double> grad) const {
  for (std::size_t i = 0; i < sd_.size(); ++i) grad[i] = theta[i] / (sd_[i] * sd_[i]);
}

double GaussianTarget::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                      ModelWorkspace*) const {
  return 0.5 * (value * value - theta[j] * theta[j]) / (sd_[j] * sd_[j]);
}

DiscretePmfTarget::DiscretePmfTarget(std::vector<double> pmf, std::int64_t first)
    : pmf_(checked_pmf(std::move(pmf))),
      map_(EmbeddingMap::uniform(first, first + static_cast<std::int64_t>(pmf_.size()) - 1)) {}

double DiscretePmfTarget::potential(std::span<const double> theta) const {
  const auto k = map_.interval(theta[0]);
  if (!k) return kInf;
  return -std::log(pmf_[*k]);
}

std::vector<double> DiscretePmfTarget::initial_point() const {
  return {map_.embed_center(map_.first_value())};
}

StepTarget::StepTarget(std::size_t d, double height, double threshold, bool quadratic)
    : d_(d), height_(height), threshold_(threshold), quadratic_(quadratic) {
  if (d == 0) throw ContractError("step target needs dimension >= 1");
}

double StepTarget::potential(std::span<const double> theta) const {
  double u = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    if (quadratic_) u += 0.5 * theta[i] * theta[i];
    if (theta[i] >= threshold_) u += height_;
  }
  return u;
}

void StepTarget::gradient(std::span<const double> theta, std::span<double> grad) const {
  for (std::size_t i = 0; i < d_; ++i) grad[i] = quadratic_ ? theta[i] : 0.0;
}

MixedToyTarget::MixedToyTarget(std::vector<double> pmf, double coupling)
    : pmf_(checked_pmf(std::move(pmf))),
      coupling_(coupling),
      map_(EmbeddingMap::uniform(1, static_cast<std::int64_t>(pmf_.size()))) {}

double MixedToyTarget::potential(std::span<const double> theta) const {
  const auto k = map_.interval(theta[1]);
  if (!k) return kInf;
  const double r = theta[0] - coupling_ * static_cast<double>(*k + 1);
  return 0.5 * r * r - std::log(pmf_[*k]);
}

void MixedToyTarget::gradient(std::span<const double> theta, std::span<double> grad) const {
  const auto k = map_.interval(theta[1]);
  const double n = k ? static_cast<double>(*k + 1) : 0.0;
  grad[0] = theta[0] - coupling_ * n;
  grad[1] = 0.0;
}

std::vector<double> MixedToyTarget::initial_point() const { return {coupling_, map_.embed_center(1)}; }

BananaTarget::BananaTarget(double cell, double half_width) : map_(grid_map(cell, half_width)) {}

double BananaTarget::smooth_potential(double x, double y) {
  const double r = y - 0.25 * x * x + 1.0;
  return x * x / 8.0 + 2.0 * r * r;
}

double BananaTarget::potential(std::span<const double> theta) const {
  const auto kx = map_.interval(theta[0]);
  const auto ky = map_.interval(theta[1]);
  if (!kx || !ky) return kInf;
  const auto knots = map_.knots();
  return smooth_potential(0.5 * (knots[*kx] + knots[*kx + 1]), 0.5 * (knots[*ky] + knots[*ky + 1]));
}

}  // namespace dhmc::models

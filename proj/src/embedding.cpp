#include "dhmc/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dhmc/errors.hpp"

namespace dhmc {

EmbeddingMap::EmbeddingMap(std::vector<double> knots, std::int64_t first, Kind kind)
    : knots_(std::move(knots)), first_(first), kind_(kind) {
  if (knots_.size() < 2) throw ContractError("an embedding needs at least two knots");
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1]) || !std::isfinite(knots_[k])) {
      throw ContractError("embedding knots must be finite and strictly increasing");
    }
  }
}

EmbeddingMap EmbeddingMap::uniform(std::int64_t first, std::int64_t last) {
  if (last < first) throw ContractError("embedding range is empty");
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(last - first + 2));
  for (std::int64_t n = first; n <= last + 1; ++n) knots.push_back(static_cast<double>(n));
  return EmbeddingMap(std::move(knots), first, Kind::uniform);
}

EmbeddingMap EmbeddingMap::logarithmic(std::int64_t first, std::int64_t last) {
  if (first < 1) throw ContractError("logarithmic embedding requires ordinals >= 1");
  if (last < first) throw ContractError("embedding range is empty");
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(last - first + 2));
  for (std::int64_t n = first; n <= last + 1; ++n) knots.push_back(std::log(static_cast<double>(n)));
  return EmbeddingMap(std::move(knots), first, Kind::logarithmic);
}

EmbeddingMap EmbeddingMap::custom(std::vector<double> knots, std::int64_t first_value) {
  return EmbeddingMap(std::move(knots), first_value, Kind::custom);
}

std::optional<std::size_t> EmbeddingMap::interval(double x) const noexcept {
  if (!(x > knots_.front()) || !(x <= knots_.back())) return std::nullopt;
  // First knot >= x is a_{n+1}; half-open intervals (a_n, a_{n+1}].
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

std::int64_t EmbeddingMap::lookup(double x) const {
  const auto k = interval(x);
  if (!k) throw OutOfSupport("value " + std::to_string(x) + " outside the embedded support");
  return first_ + static_cast<std::int64_t>(*k);
}

std::size_t EmbeddingMap::checked_index(std::int64_t n) const {
  if (n < first_ || n > last_value()) {
    throw ContractError("ordinal " + std::to_string(n) + " outside the embedding range");
  }
  return static_cast<std::size_t>(n - first_);
}

double EmbeddingMap::embed_center(std::int64_t n) const {
  const auto k = checked_index(n);
  return 0.5 * (knots_[k] + knots_[k + 1]);
}

double EmbeddingMap::width(std::int64_t n) const {
  const auto k = checked_index(n);
  return knots_[k + 1] - knots_[k];
}

double EmbeddedPrior::log_density(double x) const {
  const auto k = map.interval(x);
  if (!k) return -std::numeric_limits<double>::infinity();
  const std::int64_t n = map.first_value() + static_cast<std::int64_t>(*k);
  return log_pmf(n) - std::log(map.width(n));
}

}  // namespace dhmc

#include "dhmc/models/binomial_n.hpp"

#include <cmath>

namespace dhmc::models {

namespace {

EmbeddingMap make_map(std::int64_t y, std::int64_t n_max, EmbeddingMap::Kind kind) {
  const std::int64_t first = std::max<std::int64_t>(y, 1);
  if (n_max < first) throw ContractError("n_max must be at least max(y, 1)");
  if (kind == EmbeddingMap::Kind::logarithmic) return EmbeddingMap::logarithmic(first, n_max);
  return EmbeddingMap::uniform(first, n_max);
}

}  // namespace

BinomialNTarget::BinomialNTarget(std::int64_t y, double q, std::int64_t n_max, EmbeddingMap::Kind kind)
    : y_(y), q_(q), map_(make_map(y, n_max, kind)) {
  if (y < 0) throw ContractError("y must be nonnegative");
  if (!(q > 0.0 && q < 1.0)) throw ContractError("q must lie in (0, 1)");
}

double BinomialNTarget::log_pmf(std::int64_t n) const {
  const auto nd = static_cast<double>(n);
  const auto yd = static_cast<double>(y_);
  const double log_choose = std::lgamma(nd + 1.0) - std::lgamma(yd + 1.0) - std::lgamma(nd - yd + 1.0);
  return -std::log(nd) + log_choose + yd * std::log(q_) + (nd - yd) * std::log1p(-q_);
}

double BinomialNTarget::log_posterior(double x) const {
  const auto k = map_.interval(x);
  if (!k) return -kInf;
  const std::int64_t n = map_.first_value() + static_cast<std::int64_t>(*k);
  return log_pmf(n) - std::log(map_.width(n));
}

double BinomialNTarget::potential(std::span<const double> theta) const { return -log_posterior(theta[0]); }

double BinomialNTarget::potential_diff(std::span<const double> theta, std::size_t, double value,
                                       ModelWorkspace*) const {
  const auto k_old = map_.interval(theta[0]);
  if (!k_old) throw ContractError("potential difference taken outside the support");
  const auto k_new = map_.interval(value);
  if (!k_new) return kInf;
  if (*k_new == *k_old) return 0.0;
  return log_posterior(theta[0]) - log_posterior(value);
}

std::vector<double> BinomialNTarget::initial_point() const {
  const std::int64_t guess = std::max(map_.first_value(), static_cast<std::int64_t>(std::llround(y_ / q_)));
  return {map_.embed_center(std::min(guess, map_.last_value()))};
}

}  // namespace dhmc::models

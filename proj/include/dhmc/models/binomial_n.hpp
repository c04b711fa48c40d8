#pragma once

#include "dhmc/core.hpp"
#include "dhmc/embedding.hpp"

namespace dhmc::models {

// y | N ~ Binom(N, q) with prior pi(N) proportional to 1/N, N embedded over
// max(y, 1)..n_max.
class BinomialNTarget final : public TargetModel {
 public:
  BinomialNTarget(std::int64_t y, double q, std::int64_t n_max,
                  EmbeddingMap::Kind kind = EmbeddingMap::Kind::uniform);

  std::size_t dim() const override { return 1; }
  std::string name() const override { return "binomial_n"; }
  double potential(std::span<const double> theta) const override;
  bool has_potential_diff() const override { return true; }
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override { return {"N"}; }
  const EmbeddingMap* embedding(std::size_t) const override { return &map_; }

  // log pi(N = n | y) up to a constant, without the embedding correction.
  double log_pmf(std::int64_t n) const;
  // Embedded log density; -inf outside the support.
  double log_posterior(double x) const;
  const EmbeddingMap& map() const { return map_; }

 private:
  std::int64_t y_;
  double q_;
  EmbeddingMap map_;
};

}  // namespace dhmc::models

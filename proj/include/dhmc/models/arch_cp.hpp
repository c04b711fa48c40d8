#pragma once

#include <cstddef>
#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/embedding.hpp"
#include "dhmc/store.hpp"

namespace dhmc::models {

// ARCH(1) returns with piecewise-constant (a(t), b(t)) and horseshoe shrinkage
// on the log increments between segments.
//
// Segment k = 0..K covers tau_k < t <= tau_{k+1} with tau_0 = 1 and
// tau_{K+1} = T; times are 1-based and the likelihood runs over t = 2..T.
//
// Parameter layout (K = k_max):
//   [0, K)          tau_1..tau_K, embedded on uniform knots over 2..T-1
//   K, K+1          log a_0, log b_0
//   [K+2, 2K+2)     log(a_k / a_{k-1})
//   [2K+2, 3K+2)    log(b_k / b_{k-1})
//   [3K+2, 4K+2)    log eta_{a,k}
//   [4K+2, 5K+2)    log eta_{b,k}
//   5K+2, 5K+3      log sigma_a, log sigma_b
class ArchChangePointTarget final : public TargetModel {
 public:
  ArchChangePointTarget(std::vector<double> y, std::size_t k_max);

  std::size_t dim() const override { return 5 * k_ + 4; }
  std::string name() const override { return "arch_cp"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  bool has_potential_diff() const override { return true; }
  // O(|tau_new - tau_old|) for change-point moves.
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;
  Partition default_partition() const override;
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override;
  const EmbeddingMap* embedding(std::size_t j) const override { return j < k_ ? &map_ : nullptr; }
  // sigma_a, sigma_b, C_a, C_b, log posterior.
  std::vector<std::string> derived_names() const override;
  void derived(std::span<const double> theta, std::vector<double>& out) const override;

  std::size_t k_max() const { return k_; }
  std::size_t length() const { return y_.size(); }
  const std::vector<double>& returns() const { return y_; }
  // Decoded tau_1..tau_K; false when out of support or not strictly increasing.
  bool decode_tau(std::span<const double> theta, std::vector<std::int64_t>& tau) const;
  // a_0..a_K and b_0..b_K.
  void segment_levels(std::span<const double> theta, std::vector<double>& a, std::vector<double>& b) const;
  // Number of increments with |log ratio| above `threshold`.
  static std::size_t change_count(std::span<const double> log_ratios, double threshold = 0.1);
  // a(t) and b(t) for t = 1..T (index t-1).
  void volatility_functions(std::span<const double> theta, std::vector<double>& a_t, std::vector<double>& b_t) const;

 private:
  // Log-likelihood contribution of time t (1-based) under levels (a, b).
  double point_loglik(std::size_t t, double a, double b) const;

  std::vector<double> y_;
  std::size_t k_;
  EmbeddingMap map_;
};

// Adds log ||a||_2 and log ||b||_2 columns, where ||a||_2 sums the squared
// deviation of a(t) from its draw-averaged value over t.
void add_function_norms(SampleStore& store, const ArchChangePointTarget& model);

}  // namespace dhmc::models

#pragma once

#include "dhmc/core.hpp"

namespace dhmc::models {

// Stationary unit-variance AR(1): theta_t = alpha theta_{t-1} + sqrt(1 - alpha^2) eta_t.
// U = theta' Q theta / 2 with the tridiagonal precision Q.
class Ar1Target final : public TargetModel {
 public:
  explicit Ar1Target(std::size_t dim = 100, double alpha = 0.9);

  std::size_t dim() const override { return d_; }
  std::string name() const override { return "ar1"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  bool has_potential_diff() const override { return true; }
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;

  double alpha() const { return alpha_; }
  double precision_diag(std::size_t j) const;
  double precision_offdiag() const { return -alpha_ * inv_; }

 private:
  std::size_t d_;
  double alpha_;
  double inv_;  // 1 / (1 - alpha^2)
};

}  // namespace dhmc::models

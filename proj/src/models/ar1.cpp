#include "dhmc/models/ar1.hpp"

#include <cmath>

namespace dhmc::models {

Ar1Target::Ar1Target(std::size_t dim, double alpha) : d_(dim), alpha_(alpha), inv_(1.0 / (1.0 - alpha * alpha)) {
  if (dim < 2) throw ContractError("ar1 target needs dimension >= 2");
  if (!(std::abs(alpha) < 1.0)) throw ContractError("ar1 requires |alpha| < 1");
}

double Ar1Target::precision_diag(std::size_t j) const {
  return (j == 0 || j + 1 == d_) ? inv_ : (1.0 + alpha_ * alpha_) * inv_;
}

double Ar1Target::potential(std::span<const double> theta) const {
  // theta' Q theta = theta_0^2 + sum_t (theta_t - alpha theta_{t-1})^2 / (1 - alpha^2).
  double u = theta[0] * theta[0];
  for (std::size_t t = 1; t < d_; ++t) {
    const double r = theta[t] - alpha_ * theta[t - 1];
    u += r * r * inv_;
  }
  return 0.5 * u;
}

void Ar1Target::gradient(std::span<const double> theta, std::span<double> grad) const {
  const double off = precision_offdiag();
  for (std::size_t j = 0; j < d_; ++j) {
    double g = precision_diag(j) * theta[j];
    if (j > 0) g += off * theta[j - 1];
    if (j + 1 < d_) g += off * theta[j + 1];
    grad[j] = g;
  }
}

double Ar1Target::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                 ModelWorkspace*) const {
  const double off = precision_offdiag();
  double neighbours = 0.0;
  if (j > 0) neighbours += off * theta[j - 1];
  if (j + 1 < d_) neighbours += off * theta[j + 1];
  const double delta = value - theta[j];
  return delta * (0.5 * precision_diag(j) * (value + theta[j]) + neighbours);
}

}  // namespace dhmc::models

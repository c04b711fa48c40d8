#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dhmc/models/jolly_seber.hpp"

namespace dhmc::oracles {

// P(a < Z <= b), differencing upper tails on the side away from the mode.
inline double normal_interval(double a, double b) {
  const double r = 1.0 / std::sqrt(2.0);
  if (a > 0.0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
  if (b < 0.0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
  return 0.5 * (std::erf(b * r) - std::erf(a * r));
}

// Unnormalized posterior of N written as a running product, no lgamma.
inline std::vector<double> binomial_oracle(std::int64_t y, double q, std::int64_t n_max) {
  std::vector<double> w;
  for (std::int64_t n = std::max<std::int64_t>(y, 1); n <= n_max; ++n) {
    double choose = 1.0;
    for (std::int64_t k = 0; k < y; ++k) choose *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    w.push_back(choose * std::pow(q, static_cast<double>(y)) * std::pow(1.0 - q, static_cast<double>(n - y)) /
                static_cast<double>(n));
  }
  return w;
}

// Capture-recapture log posterior on the probability scale, written from the
// model description: chi by direct summation over death times, falling
// factorials by loops and floor-Normal masses from erf and erfc.
inline double js_oracle(const models::JollySeberData& d, const std::vector<std::int64_t>& U, const std::vector<double>& p,
                 const std::vector<double>& phi, double sigma_b) {
  const std::size_t T = d.u.size();
  double lp = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    for (std::int64_t k = 0; k < d.u[i]; ++k) lp += std::log(static_cast<double>(U[i] - k));
    lp += static_cast<double>(d.u[i]) * std::log(p[i]) + static_cast<double>(U[i] - d.u[i]) * std::log(1.0 - p[i]);
    lp -= std::log(std::log(static_cast<double>(U[i] + 1) / static_cast<double>(U[i])));
  }
  for (std::size_t i = 0; i + 1 < T; ++i) {
    // Never seen again: survive and be missed through k, then die (or reach the end).
    double chi = 0.0, unseen = 1.0;
    for (std::size_t k = i; k < T; ++k) {
      chi += unseen * (k + 1 < T ? 1.0 - phi[k] : 1.0);
      if (k + 1 < T) unseen *= phi[k] * (1.0 - p[k + 1]);
    }
    lp += static_cast<double>(d.R[i] - d.r[i]) * std::log(chi);
    lp += static_cast<double>(d.z[i + 1]) * std::log(phi[i] * (1.0 - p[i + 1]));
    lp += static_cast<double>(d.m[i + 1]) * std::log(phi[i] * p[i + 1]);
  }
  lp -= std::log(static_cast<double>(U[0]));
  for (std::size_t i = 0; i + 1 < T; ++i) {
    const double mu = static_cast<double>(U[i] - d.u[i]);
    const double s = std::sqrt(sigma_b * sigma_b + phi[i] * (1.0 - phi[i]));
    const double n = static_cast<double>(U[i + 1]);
    lp += std::log(normal_interval((n - mu) / s, (n + 1.0 - mu) / s));
  }
  return lp;
}

}  // namespace dhmc::oracles

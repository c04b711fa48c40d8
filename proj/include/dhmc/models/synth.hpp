#pragma once

#include <cstdint>
#include <vector>

#include "dhmc/models/gen_bayes.hpp"
#include "dhmc/models/jolly_seber.hpp"
#include "dhmc/rng.hpp"

namespace dhmc::models {

struct SynthClassification {
  ClassificationData data;
  std::vector<double> beta_true;
};

// Standardized Gaussian predictors with labels y = sign(x' beta*), sign(0) = +1.
SynthClassification synth_classification(Rng& rng, std::size_t n, std::size_t k);

struct SynthArch {
  std::vector<double> y;
  std::vector<std::int64_t> change_points;  // 1-based, segment k ends at change_points[k]
  std::vector<double> a, b;
};

// y_1 ~ Normal(0, a(1)), y_t ~ Normal(0, a(t) + b(t) y_{t-1}^2) with levels
// switching after each planted change point.
SynthArch synth_arch(Rng& rng, std::size_t length, std::vector<std::int64_t> change_points,
                     std::vector<double> a, std::vector<double> b);

struct SynthJollySeber {
  JollySeberData data;
  std::vector<std::int64_t> U;  // unmarked alive just before occasion i
  std::vector<std::int64_t> N;  // alive just before occasion i
  std::vector<double> p, phi;
  std::vector<std::int64_t> births;
};

// Individual-level simulation: every alive animal is caught with p_i at
// occasion i, all captures are released, survival phi_i acts between
// occasions and births[i] unmarked animals join after occasion i.
SynthJollySeber synth_jolly_seber(Rng& rng, std::int64_t initial_population, std::vector<double> p,
                                  std::vector<double> phi, std::vector<std::int64_t> births);

}  // namespace dhmc::models

#pragma once

#include <cstdint>
#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/embedding.hpp"
#include "dhmc/store.hpp"

namespace dhmc::models {

// Capture-recapture summary statistics for occasions 1..T (stored 0-based).
struct JollySeberData {
  std::vector<std::int64_t> R, r, z, m, u;

  std::size_t occasions() const { return u.size(); }
  // Throws DataError on negative counts, r > R or mismatched lengths.
  void validate() const;
};

// Parameter layout: U_1..U_T embedded on log knots, then logit p_1..p_T,
// then logit phi_1..phi_{T-1}.
class JollySeberTarget final : public TargetModel {
 public:
  JollySeberTarget(JollySeberData data, double sigma_b = 500.0, std::int64_t n_max = 5000);

  std::size_t dim() const override { return 3 * t_ - 1; }
  std::string name() const override { return "jolly_seber"; }
  double potential(std::span<const double> theta) const override;
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> theta, std::span<double> grad) const override;
  bool has_potential_diff() const override { return true; }
  double potential_diff(std::span<const double> theta, std::size_t j, double value,
                        ModelWorkspace* ws) const override;
  Partition default_partition() const override;
  std::vector<double> initial_point() const override;
  std::vector<std::string> parameter_names() const override;
  const EmbeddingMap* embedding(std::size_t j) const override { return j < t_ ? &maps_[j] : nullptr; }
  std::vector<std::string> derived_names() const override;
  void derived(std::span<const double> theta, std::vector<double>& out) const override;

  double log_posterior(std::span<const double> theta) const { return -potential(theta); }
  // chi_i for the decoded p and phi, i = 0..T-1 with chi_{T-1} = 1.
  std::vector<double> chi(std::span<const double> p, std::span<const double> phi) const;

  std::size_t occasions() const { return t_; }
  std::size_t p_index(std::size_t i) const { return t_ + i; }
  std::size_t phi_index(std::size_t i) const { return 2 * t_ + i; }
  const JollySeberData& data() const { return data_; }
  double sigma_b() const { return sigma_b_; }

 private:
  // Every term of the log posterior that involves U_j at ordinal n.
  double local_u_terms(std::span<const double> theta, std::size_t j, std::int64_t n) const;
  bool decode_u(std::span<const double> theta, std::vector<std::int64_t>& u) const;

  JollySeberData data_;
  std::size_t t_;
  double sigma_b_;
  std::vector<EmbeddingMap> maps_;
};

// log P(floor(X) = n) for X ~ Normal(mu, s^2); optionally d/ds of it.
double log_floor_normal(double n, double mu, double s, double* dlog_ds = nullptr);

// Adds N_i = M_i + U_i columns by forward-simulating the marked population
// M_1 = 0, M_{i+1} ~ Binom(M_i - m_i + R_i, phi_i) once per draw.
void add_population_sizes(SampleStore& store, const JollySeberTarget& model, std::uint64_t seed);

}  // namespace dhmc::models

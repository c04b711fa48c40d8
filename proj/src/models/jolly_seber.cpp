#include "dhmc/models/jolly_seber.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dhmc::models {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double upper_tail(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }
double std_density(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
// log(sigmoid(x)) and log(1 - sigmoid(x)) without cancellation.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double log_one_minus_sigmoid(double x) { return log_sigmoid(-x); }

}  // namespace

double log_floor_normal(double n, double mu, double s, double* dlog_ds) {
  const double a = (n - mu) / s;
  const double b = (n + 1.0 - mu) / s;
  // Mass of (a, b] taken from whichever tail keeps the subtraction well conditioned.
  const double mass = a >= 0.0 ? upper_tail(a) - upper_tail(b)
                      : b <= 0.0 ? upper_tail(-b) - upper_tail(-a)
                                 : 1.0 - upper_tail(-a) - upper_tail(b);
  if (!(mass > 0.0)) {
    if (dlog_ds) *dlog_ds = 0.0;
    return -kInf;
  }
  if (dlog_ds) *dlog_ds = (a * std_density(a) - b * std_density(b)) / (s * mass);
  return std::log(mass);
}

void JollySeberData::validate() const {
  const std::size_t t = u.size();
  if (t < 2) throw DataError("jolly-seber data needs at least two occasions");
  if (R.size() != t || r.size() != t || z.size() != t || m.size() != t) {
    throw DataError("jolly-seber statistics have mismatched lengths");
  }
  for (std::size_t i = 0; i < t; ++i) {
    if (R[i] < 0 || r[i] < 0 || z[i] < 0 || m[i] < 0 || u[i] < 0) {
      throw DataError("jolly-seber statistics must be nonnegative");
    }
    if (r[i] > R[i]) throw DataError("r_i exceeds R_i at occasion " + std::to_string(i + 1));
  }
}

JollySeberTarget::JollySeberTarget(JollySeberData data, double sigma_b, std::int64_t n_max)
    : data_(std::move(data)), t_(data_.occasions()), sigma_b_(sigma_b) {
  data_.validate();
  if (!(sigma_b > 0.0)) throw ContractError("sigma_B must be positive");
  for (std::size_t i = 0; i < t_; ++i) {
    const std::int64_t first = std::max<std::int64_t>(data_.u[i], 1);
    if (n_max < first) throw DataError("n_max is below an observed count of unmarked captures");
    maps_.push_back(EmbeddingMap::logarithmic(first, n_max));
  }
}

Partition JollySeberTarget::default_partition() const {
  std::vector<std::size_t> disc(t_);
  for (std::size_t i = 0; i < t_; ++i) disc[i] = i;
  return Partition::from_disc(dim(), std::move(disc));
}

std::vector<std::string> JollySeberTarget::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t_; ++i) names.push_back("U" + std::to_string(i + 1));
  for (std::size_t i = 0; i < t_; ++i) names.push_back("logit_p" + std::to_string(i + 1));
  for (std::size_t i = 0; i + 1 < t_; ++i) names.push_back("logit_phi" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> JollySeberTarget::derived_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t_; ++i) names.push_back("p" + std::to_string(i + 1));
  for (std::size_t i = 0; i + 1 < t_; ++i) names.push_back("phi" + std::to_string(i + 1));
  return names;
}

void JollySeberTarget::derived(std::span<const double> theta, std::vector<double>& out) const {
  out.clear();
  for (std::size_t i = 0; i < t_; ++i) out.push_back(logistic(theta[p_index(i)]));
  for (std::size_t i = 0; i + 1 < t_; ++i) out.push_back(logistic(theta[phi_index(i)]));
}

std::vector<double> JollySeberTarget::initial_point() const {
  // p = 0.5, phi = 0.5 and U_i near twice the unmarked catch.
  std::vector<double> x(dim(), 0.0);
  for (std::size_t i = 0; i < t_; ++i) {
    const std::int64_t n = std::clamp<std::int64_t>(2 * data_.u[i] + 1, maps_[i].first_value(), maps_[i].last_value());
    x[i] = maps_[i].embed_center(n);
  }
  return x;
}

std::vector<double> JollySeberTarget::chi(std::span<const double> p, std::span<const double> phi) const {
  std::vector<double> c(t_, 1.0);
  for (std::size_t i = t_ - 1; i-- > 0;) c[i] = 1.0 - phi[i] * (1.0 - (1.0 - p[i + 1]) * c[i + 1]);
  return c;
}

bool JollySeberTarget::decode_u(std::span<const double> theta, std::vector<std::int64_t>& u) const {
  u.resize(t_);
  for (std::size_t i = 0; i < t_; ++i) {
    const auto k = maps_[i].interval(theta[i]);
    if (!k) return false;
    u[i] = maps_[i].first_value() + static_cast<std::int64_t>(*k);
  }
  return true;
}

double JollySeberTarget::potential(std::span<const double> theta) const {
  std::vector<std::int64_t> U;
  if (!decode_u(theta, U)) return kInf;
  std::vector<double> p(t_), phi(t_ - 1);
  double lp = 0.0;
  for (std::size_t i = 0; i < t_; ++i) {
    const double x = theta[p_index(i)];
    p[i] = logistic(x);
    lp += log_sigmoid(x) + log_one_minus_sigmoid(x);  // uniform prior on p through the logit
  }
  for (std::size_t i = 0; i + 1 < t_; ++i) {
    const double x = theta[phi_index(i)];
    phi[i] = logistic(x);
    lp += log_sigmoid(x) + log_one_minus_sigmoid(x);
  }

  for (std::size_t i = 0; i < t_; ++i) {
    const auto n = static_cast<double>(U[i]);
    const auto ui = static_cast<double>(data_.u[i]);
    lp += std::lgamma(n + 1.0) - std::lgamma(n - ui + 1.0);
    lp += ui * log_sigmoid(theta[p_index(i)]) + (n - ui) * log_one_minus_sigmoid(theta[p_index(i)]);
    lp -= std::log(maps_[i].width(U[i]));
  }

  const auto c = chi(p, phi);
  for (std::size_t i = 0; i + 1 < t_; ++i) {
    const auto unseen = static_cast<double>(data_.R[i] - data_.r[i]);
    if (unseen > 0.0) lp += unseen * std::log(c[i]);
    const double log_phi = log_sigmoid(theta[phi_index(i)]);
    lp += static_cast<double>(data_.z[i + 1]) * (log_phi + log_one_minus_sigmoid(theta[p_index(i + 1)]));
    lp += static_cast<double>(data_.m[i + 1]) * (log_phi + log_sigmoid(theta[p_index(i + 1)]));
  }

  lp -= std::log(static_cast<double>(U[0]));
  for (std::size_t i = 0; i + 1 < t_; ++i) {
    const double s = std::sqrt(sigma_b_ * sigma_b_ + phi[i] * (1.0 - phi[i]));
    lp += log_floor_normal(static_cast<double>(U[i + 1]), static_cast<double>(U[i] - data_.u[i]), s);
  }
  return -lp;
}

void JollySeberTarget::gradient(std::span<const double> theta, std::span<double> grad) const {
  std::vector<std::int64_t> U;
  if (!decode_u(theta, U)) throw ContractError("gradient requested outside the support");
  std::vector<double> p(t_), phi(t_ - 1), dp(t_, 0.0), dphi(t_ - 1, 0.0);
  for (std::size_t i = 0; i < t_; ++i) p[i] = logistic(theta[p_index(i)]);
  for (std::size_t i = 0; i + 1 < t_; ++i) phi[i] = logistic(theta[phi_index(i)]);

  // d log posterior / d p_i and d phi_i on the probability scale.
  for (std::size_t i = 0; i < t_; ++i) {
    const auto ui = static_cast<double>(data_.u[i]);
    dp[i] += ui / p[i] - (static_cast<double>(U[i]) - ui) / (1.0 - p[i]);
  }
  const auto c = chi(p, phi);
  double carry = 0.0;  // adjoint of chi_i accumulated from chi_{i-1}
  for (std::size_t i = 0; i + 1 < t_; ++i) {
    const auto unseen = static_cast<double>(data_.R[i] - data_.r[i]);
    const double g = (unseen > 0.0 ? unseen / c[i] : 0.0) + carry;
    // chi_i = 1 - phi_i (1 - (1 - p_{i+1}) chi_{i+1})
    dphi[i] += -g * (1.0 - (1.0 - p[i + 1]) * c[i + 1]);
    dp[i + 1] += -g * phi[i] * c[i + 1];
    carry = g * phi[i] * (1.0 - p[i + 1]);

    const auto zi = static_cast<double>(data_.z[i + 1]);
    const auto mi = static_cast<double>(data_.m[i + 1]);
    dphi[i] += (zi + mi) / phi[i];
    dp[i + 1] += mi / p[i + 1] - zi / (1.0 - p[i + 1]);

    const double v = phi[i] * (1.0 - phi[i]);
    const double s = std::sqrt(sigma_b_ * sigma_b_ + v);
    double dlog_ds = 0.0;
    log_floor_normal(static_cast<double>(U[i + 1]), static_cast<double>(U[i] - data_.u[i]), s, &dlog_ds);
    dphi[i] += dlog_ds * (1.0 - 2.0 * phi[i]) / (2.0 * s);
  }

  for (std::size_t j = 0; j < t_; ++j) grad[j] = 0.0;
  // Chain rule through the logit plus the derivative of the log Jacobian, 1 - 2 sigmoid.
  for (std::size_t i = 0; i < t_; ++i) grad[p_index(i)] = -(dp[i] * p[i] * (1.0 - p[i]) + 1.0 - 2.0 * p[i]);
  for (std::size_t i = 0; i + 1 < t_; ++i) {
    grad[phi_index(i)] = -(dphi[i] * phi[i] * (1.0 - phi[i]) + 1.0 - 2.0 * phi[i]);
  }
}

double JollySeberTarget::local_u_terms(std::span<const double> theta, std::size_t j, std::int64_t n) const {
  const auto nd = static_cast<double>(n);
  const auto uj = static_cast<double>(data_.u[j]);
  double lp = std::lgamma(nd + 1.0) - std::lgamma(nd - uj + 1.0) + (nd - uj) * log_one_minus_sigmoid(theta[p_index(j)]);
  lp -= std::log(maps_[j].width(n));
  if (j == 0) {
    lp -= std::log(nd);
  } else {
    const std::int64_t prev = maps_[j - 1].lookup(theta[j - 1]);
    const double ph = logistic(theta[phi_index(j - 1)]);
    lp += log_floor_normal(nd, static_cast<double>(prev - data_.u[j - 1]), std::sqrt(sigma_b_ * sigma_b_ + ph * (1.0 - ph)));
  }
  if (j + 1 < t_) {
    const std::int64_t next = maps_[j + 1].lookup(theta[j + 1]);
    const double ph = logistic(theta[phi_index(j)]);
    lp += log_floor_normal(static_cast<double>(next), nd - uj, std::sqrt(sigma_b_ * sigma_b_ + ph * (1.0 - ph)));
  }
  return lp;
}

double JollySeberTarget::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                        ModelWorkspace* ws) const {
  if (j >= t_) return TargetModel::potential_diff(theta, j, value, ws);
  const auto k_old = maps_[j].interval(theta[j]);
  if (!k_old) throw ContractError("potential difference taken outside the support");
  const auto k_new = maps_[j].interval(value);
  if (!k_new) return kInf;
  if (*k_new == *k_old) return 0.0;
  const std::int64_t first = maps_[j].first_value();
  const double before = local_u_terms(theta, j, first + static_cast<std::int64_t>(*k_old));
  const double after = local_u_terms(theta, j, first + static_cast<std::int64_t>(*k_new));
  if (std::isinf(after) && after < 0.0) return kInf;
  return before - after;
}

void add_population_sizes(SampleStore& store, const JollySeberTarget& model, std::uint64_t seed) {
  const std::size_t t = model.occasions();
  const auto& d = model.data();
  Rng rng(seed);
  std::vector<const std::vector<double>*> u_cols(t), phi_cols(t - 1);
  for (std::size_t i = 0; i < t; ++i) u_cols[i] = &store.column("U" + std::to_string(i + 1));
  for (std::size_t i = 0; i + 1 < t; ++i) phi_cols[i] = &store.column("phi" + std::to_string(i + 1));

  std::vector<std::vector<double>> n_cols(t, std::vector<double>(store.rows()));
  for (std::size_t row = 0; row < store.rows(); ++row) {
    std::int64_t marked = 0;
    for (std::size_t i = 0; i < t; ++i) {
      n_cols[i][row] = static_cast<double>(marked) + (*u_cols[i])[row];
      if (i + 1 == t) break;
      const std::int64_t at_risk = std::max<std::int64_t>(marked - d.m[i], 0) + d.R[i];
      const double ph = (*phi_cols[i])[row];
      std::int64_t survivors = 0;
      for (std::int64_t k = 0; k < at_risk; ++k) survivors += rng.uniform() < ph ? 1 : 0;
      marked = survivors;
    }
  }
  for (std::size_t i = 0; i < t; ++i) {
    store.add_column("N" + std::to_string(i + 1), SampleStore::ColumnKind::derived, std::move(n_cols[i]));
  }
}

}  // namespace dhmc::models

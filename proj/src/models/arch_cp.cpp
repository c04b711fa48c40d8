#include "dhmc/models/arch_cp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dhmc::models {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
const double kLogTwoOverPi = std::log(2.0 / std::numbers::pi);

// log density of a half-Cauchy(0, 1) variable sampled as its logarithm.
double log_half_cauchy_on_log(double lam) {
  const double e = std::exp(lam);
  return kLogTwoOverPi - std::log1p(e * e) + lam;
}

double d_log_half_cauchy_on_log(double lam) {
  const double e2 = std::exp(2.0 * lam);
  return 1.0 - 2.0 * e2 / (1.0 + e2);
}

struct Layout {
  std::size_t k;
  std::size_t log_a0() const { return k; }
  std::size_t log_b0() const { return k + 1; }
  std::size_t da(std::size_t i) const { return k + 2 + i; }
  std::size_t db(std::size_t i) const { return 2 * k + 2 + i; }
  std::size_t eta_a(std::size_t i) const { return 3 * k + 2 + i; }
  std::size_t eta_b(std::size_t i) const { return 4 * k + 2 + i; }
  std::size_t sigma_a() const { return 5 * k + 2; }
  std::size_t sigma_b() const { return 5 * k + 3; }
};

}  // namespace

ArchChangePointTarget::ArchChangePointTarget(std::vector<double> y, std::size_t k_max)
    : y_(std::move(y)), k_(k_max), map_(EmbeddingMap::uniform(2, std::max<std::int64_t>(2, static_cast<std::int64_t>(y_.size()) - 1))) {
  if (k_max < 1) throw ContractError("arch change-point model needs k_max >= 1");
  if (y_.size() < k_max + 3) throw DataError("return series is too short for the requested change points");
  for (double v : y_) {
    if (!std::isfinite(v)) throw DataError("returns must be finite");
  }
}

Partition ArchChangePointTarget::default_partition() const {
  std::vector<std::size_t> disc(k_);
  for (std::size_t i = 0; i < k_; ++i) disc[i] = i;
  return Partition::from_disc(dim(), std::move(disc));
}

std::vector<std::string> ArchChangePointTarget::parameter_names() const {
  std::vector<std::string> names;
  auto idx = [](std::size_t i) { return std::to_string(i + 1); };
  for (std::size_t i = 0; i < k_; ++i) names.push_back("tau" + idx(i));
  names.push_back("log_a0");
  names.push_back("log_b0");
  for (std::size_t i = 0; i < k_; ++i) names.push_back("dlog_a" + idx(i));
  for (std::size_t i = 0; i < k_; ++i) names.push_back("dlog_b" + idx(i));
  for (std::size_t i = 0; i < k_; ++i) names.push_back("log_eta_a" + idx(i));
  for (std::size_t i = 0; i < k_; ++i) names.push_back("log_eta_b" + idx(i));
  names.push_back("log_sigma_a");
  names.push_back("log_sigma_b");
  return names;
}

std::vector<std::string> ArchChangePointTarget::derived_names() const {
  return {"sigma_a", "sigma_b", "C_a", "C_b", "log_posterior"};
}

std::vector<double> ArchChangePointTarget::initial_point() const {
  const Layout L{k_};
  std::vector<double> x(dim(), 0.0);
  const auto T = static_cast<double>(y_.size());
  std::int64_t prev = 1;
  for (std::size_t i = 0; i < k_; ++i) {
    auto tau = static_cast<std::int64_t>(std::llround(1.0 + T * static_cast<double>(i + 1) / static_cast<double>(k_ + 1)));
    tau = std::clamp<std::int64_t>(tau, prev + 1, map_.last_value());
    x[i] = map_.embed_center(tau);
    prev = tau;
  }
  double var = 0.0;
  for (double v : y_) var += v * v;
  var /= T;
  x[L.log_a0()] = std::log(0.8 * var);
  x[L.log_b0()] = std::log(0.2);
  x[L.sigma_a()] = std::log(0.5);
  x[L.sigma_b()] = std::log(0.5);
  return x;
}

bool ArchChangePointTarget::decode_tau(std::span<const double> theta, std::vector<std::int64_t>& tau) const {
  tau.resize(k_);
  for (std::size_t i = 0; i < k_; ++i) {
    const auto c = map_.interval(theta[i]);
    if (!c) return false;
    tau[i] = map_.first_value() + static_cast<std::int64_t>(*c);
    if (i > 0 && tau[i] <= tau[i - 1]) return false;
  }
  return true;
}

void ArchChangePointTarget::segment_levels(std::span<const double> theta, std::vector<double>& a,
                                           std::vector<double>& b) const {
  const Layout L{k_};
  a.resize(k_ + 1);
  b.resize(k_ + 1);
  double la = theta[L.log_a0()], lb = theta[L.log_b0()];
  a[0] = std::exp(la);
  b[0] = std::exp(lb);
  for (std::size_t i = 0; i < k_; ++i) {
    la += theta[L.da(i)];
    lb += theta[L.db(i)];
    a[i + 1] = std::exp(la);
    b[i + 1] = std::exp(lb);
  }
}

double ArchChangePointTarget::point_loglik(std::size_t t, double a, double b) const {
  const double prev = y_[t - 2];
  const double var = a + b * prev * prev;
  const double yt = y_[t - 1];
  return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * yt * yt / var;
}

double ArchChangePointTarget::potential(std::span<const double> theta) const {
  std::vector<std::int64_t> tau;
  if (!decode_tau(theta, tau)) return kInf;
  const Layout L{k_};
  std::vector<double> a, b;
  segment_levels(theta, a, b);

  double lp = 0.0;
  const std::size_t T = y_.size();
  std::size_t seg = 0;
  for (std::size_t t = 2; t <= T; ++t) {
    while (seg < k_ && static_cast<std::int64_t>(t) > tau[seg]) ++seg;
    lp += point_loglik(t, a[seg], b[seg]);
  }

  // Half-normal a_0, b_0 through the log, with Jacobian.
  for (double l : {theta[L.log_a0()], theta[L.log_b0()]}) lp += -0.5 * std::exp(2.0 * l) + l;
  const double ls_a = theta[L.sigma_a()], ls_b = theta[L.sigma_b()];
  lp += log_half_cauchy_on_log(ls_a) + log_half_cauchy_on_log(ls_b);
  for (std::size_t i = 0; i < k_; ++i) {
    const double le_a = theta[L.eta_a(i)], le_b = theta[L.eta_b(i)];
    lp += log_half_cauchy_on_log(le_a) + log_half_cauchy_on_log(le_b);
    // log(a_k / a_{k-1}) ~ Normal(0, sd = sigma eta).
    const double za = theta[L.da(i)] * std::exp(-(ls_a + le_a));
    const double zb = theta[L.db(i)] * std::exp(-(ls_b + le_b));
    lp += -0.5 * za * za - (ls_a + le_a) - 0.5 * zb * zb - (ls_b + le_b);
  }
  return -lp;
}

void ArchChangePointTarget::gradient(std::span<const double> theta, std::span<double> grad) const {
  std::vector<std::int64_t> tau;
  if (!decode_tau(theta, tau)) throw ContractError("gradient requested outside the support");
  const Layout L{k_};
  std::vector<double> a, b;
  segment_levels(theta, a, b);

  // d loglik / d log a_k and d log b_k per segment.
  std::vector<double> ga(k_ + 1, 0.0), gb(k_ + 1, 0.0);
  const std::size_t T = y_.size();
  std::size_t seg = 0;
  for (std::size_t t = 2; t <= T; ++t) {
    while (seg < k_ && static_cast<std::int64_t>(t) > tau[seg]) ++seg;
    const double x = y_[t - 2] * y_[t - 2];
    const double var = a[seg] + b[seg] * x;
    const double yt = y_[t - 1];
    const double dvar = -0.5 / var + 0.5 * yt * yt / (var * var);
    ga[seg] += dvar * a[seg];
    gb[seg] += dvar * x * b[seg];
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  // Suffix sums: log a_k = log a_0 + sum_{l <= k} dlog_a_l.
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = k_ + 1; k-- > 1;) {
    sa += ga[k];
    sb += gb[k];
    grad[L.da(k - 1)] = -sa;
    grad[L.db(k - 1)] = -sb;
  }
  sa += ga[0];
  sb += gb[0];
  grad[L.log_a0()] = -(sa - std::exp(2.0 * theta[L.log_a0()]) + 1.0);
  grad[L.log_b0()] = -(sb - std::exp(2.0 * theta[L.log_b0()]) + 1.0);

  const double ls_a = theta[L.sigma_a()], ls_b = theta[L.sigma_b()];
  double gsa = d_log_half_cauchy_on_log(ls_a), gsb = d_log_half_cauchy_on_log(ls_b);
  for (std::size_t i = 0; i < k_; ++i) {
    const double le_a = theta[L.eta_a(i)], le_b = theta[L.eta_b(i)];
    const double inv_a = std::exp(-2.0 * (ls_a + le_a));
    const double inv_b = std::exp(-2.0 * (ls_b + le_b));
    const double da = theta[L.da(i)], db = theta[L.db(i)];
    grad[L.da(i)] += da * inv_a;
    grad[L.db(i)] += db * inv_b;
    // d/d log(scale) of -z^2/2 - log(scale) is z^2 - 1.
    const double qa = da * da * inv_a - 1.0;
    const double qb = db * db * inv_b - 1.0;
    grad[L.eta_a(i)] = -(qa + d_log_half_cauchy_on_log(le_a));
    grad[L.eta_b(i)] = -(qb + d_log_half_cauchy_on_log(le_b));
    gsa += qa;
    gsb += qb;
  }
  grad[L.sigma_a()] = -gsa;
  grad[L.sigma_b()] = -gsb;
}

double ArchChangePointTarget::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                             ModelWorkspace* ws) const {
  if (j >= k_) return TargetModel::potential_diff(theta, j, value, ws);
  std::vector<std::int64_t> tau;
  if (!decode_tau(theta, tau)) throw ContractError("potential difference taken outside the support");
  const auto c = map_.interval(value);
  if (!c) return kInf;
  const std::int64_t moved = map_.first_value() + static_cast<std::int64_t>(*c);
  if (moved == tau[j]) return 0.0;
  if ((j > 0 && moved <= tau[j - 1]) || (j + 1 < k_ && moved >= tau[j + 1])) return kInf;

  std::vector<double> a, b;
  segment_levels(theta, a, b);
  // Times in (lo, hi] switch between segment j (below tau_j) and j + 1 (above).
  const std::int64_t lo = std::min(moved, tau[j]), hi = std::max(moved, tau[j]);
  double below_minus_above = 0.0;
  for (std::int64_t t = lo + 1; t <= hi; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    below_minus_above += point_loglik(tt, a[j], b[j]) - point_loglik(tt, a[j + 1], b[j + 1]);
  }
  // Raising tau_j moves these times into the lower segment.
  return moved > tau[j] ? -below_minus_above : below_minus_above;
}

std::size_t ArchChangePointTarget::change_count(std::span<const double> log_ratios, double threshold) {
  return static_cast<std::size_t>(std::count_if(log_ratios.begin(), log_ratios.end(),
                                                [&](double v) { return std::abs(v) > threshold; }));
}

void ArchChangePointTarget::derived(std::span<const double> theta, std::vector<double>& out) const {
  const Layout L{k_};
  out.assign({std::exp(theta[L.sigma_a()]), std::exp(theta[L.sigma_b()]),
              static_cast<double>(change_count(theta.subspan(L.da(0), k_))),
              static_cast<double>(change_count(theta.subspan(L.db(0), k_))), -potential(theta)});
}

void ArchChangePointTarget::volatility_functions(std::span<const double> theta, std::vector<double>& a_t,
                                                 std::vector<double>& b_t) const {
  std::vector<std::int64_t> tau;
  if (!decode_tau(theta, tau)) throw ContractError("change points are outside the support");
  std::vector<double> a, b;
  segment_levels(theta, a, b);
  const std::size_t T = y_.size();
  a_t.resize(T);
  b_t.resize(T);
  std::size_t seg = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    while (seg < k_ && static_cast<std::int64_t>(t) > tau[seg]) ++seg;
    a_t[t - 1] = a[seg];
    b_t[t - 1] = b[seg];
  }
}

void add_function_norms(SampleStore& store, const ArchChangePointTarget& model) {
  const std::size_t rows = store.rows(), T = model.length();
  std::vector<std::vector<double>> a_draws(rows), b_draws(rows);
  std::vector<double> a_mean(T, 0.0), b_mean(T, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    model.volatility_functions(theta_at(store, model, r), a_draws[r], b_draws[r]);
    for (std::size_t t = 0; t < T; ++t) {
      a_mean[t] += a_draws[r][t] / static_cast<double>(rows);
      b_mean[t] += b_draws[r][t] / static_cast<double>(rows);
    }
  }
  std::vector<double> la(rows), lb(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sa += (a_draws[r][t] - a_mean[t]) * (a_draws[r][t] - a_mean[t]);
      sb += (b_draws[r][t] - b_mean[t]) * (b_draws[r][t] - b_mean[t]);
    }
    la[r] = std::log(sa);
    lb[r] = std::log(sb);
  }
  store.add_column("log_norm_a", SampleStore::ColumnKind::derived, std::move(la));
  store.add_column("log_norm_b", SampleStore::ColumnKind::derived, std::move(lb));
}

}  // namespace dhmc::models

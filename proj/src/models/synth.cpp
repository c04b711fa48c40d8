#include "dhmc/models/synth.hpp"

#include <cmath>

namespace dhmc::models {

SynthClassification synth_classification(Rng& rng, std::size_t n, std::size_t k) {
  if (n == 0 || k == 0) throw ContractError("synthetic classification needs n >= 1 and k >= 1");
  SynthClassification out;
  auto& X = out.data.X;
  X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
  }
  if (n > 1) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      auto col = X.col(j);
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
      if (sd > 0.0) col /= sd;
    }
  }
  out.beta_true.resize(k);
  for (auto& b : out.beta_true) b = rng.normal();
  const Eigen::Map<const Eigen::VectorXd> beta(out.beta_true.data(), static_cast<Eigen::Index>(k));
  const Eigen::VectorXd score = X * beta;
  out.data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.data.y[i] = score(static_cast<Eigen::Index>(i)) < 0.0 ? -1 : 1;
  return out;
}

SynthArch synth_arch(Rng& rng, std::size_t length, std::vector<std::int64_t> change_points,
                     std::vector<double> a, std::vector<double> b) {
  if (length < 2) throw ContractError("synthetic ARCH series needs length >= 2");
  if (a.size() != change_points.size() + 1 || b.size() != a.size()) {
    throw ContractError("ARCH levels need one entry per segment");
  }
  for (std::size_t k = 0; k < change_points.size(); ++k) {
    const auto prev = k ? change_points[k - 1] : 1;
    if (change_points[k] <= prev || change_points[k] >= static_cast<std::int64_t>(length)) {
      throw ContractError("change points must be increasing inside (1, T)");
    }
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] > 0.0) || !(b[k] >= 0.0)) throw ContractError("ARCH levels need a > 0 and b >= 0");
  }
  SynthArch out{{}, std::move(change_points), std::move(a), std::move(b)};
  out.y.resize(length);
  std::size_t seg = 0;
  for (std::size_t t = 1; t <= length; ++t) {
    while (seg < out.change_points.size() && static_cast<std::int64_t>(t) > out.change_points[seg]) ++seg;
    const double prev = t > 1 ? out.y[t - 2] : 0.0;
    out.y[t - 1] = std::sqrt(out.a[seg] + out.b[seg] * prev * prev) * rng.normal();
  }
  return out;
}

SynthJollySeber synth_jolly_seber(Rng& rng, std::int64_t initial_population, std::vector<double> p,
                                  std::vector<double> phi, std::vector<std::int64_t> births) {
  const std::size_t T = p.size();
  if (T < 2) throw ContractError("capture simulation needs at least two occasions");
  if (phi.size() != T - 1 || births.size() != T - 1) throw ContractError("phi and births need T - 1 entries");
  if (initial_population <= 0) throw ContractError("initial population must be positive");

  struct Animal {
    bool alive = true;
    std::vector<char> caught;
  };
  std::vector<Animal> animals(static_cast<std::size_t>(initial_population), Animal{true, std::vector<char>(T, 0)});

  SynthJollySeber out;
  out.U.assign(T, 0);
  out.N.assign(T, 0);
  for (std::size_t i = 0; i < T; ++i) {
    for (auto& a : animals) {
      if (!a.alive) continue;
      ++out.N[i];
      bool marked = false;
      for (std::size_t k = 0; k < i; ++k) marked = marked || a.caught[k];
      if (!marked) ++out.U[i];
      a.caught[i] = rng.uniform() < p[i];
    }
    if (i + 1 == T) break;
    for (auto& a : animals) {
      if (a.alive) a.alive = rng.uniform() < phi[i];
    }
    for (std::int64_t b = 0; b < births[i]; ++b) animals.push_back(Animal{true, std::vector<char>(T, 0)});
  }

  auto& d = out.data;
  d.R.assign(T, 0);
  d.r.assign(T, 0);
  d.z.assign(T, 0);
  d.m.assign(T, 0);
  d.u.assign(T, 0);
  for (const auto& a : animals) {
    for (std::size_t i = 0; i < T; ++i) {
      bool before = false, after = false;
      for (std::size_t k = 0; k < i; ++k) before = before || a.caught[k];
      for (std::size_t k = i + 1; k < T; ++k) after = after || a.caught[k];
      if (a.caught[i]) {
        ++d.R[i];
        (before ? d.m[i] : d.u[i]) += 1;
        if (after) ++d.r[i];
      } else if (before && after) {
        ++d.z[i];
      }
    }
  }
  out.p = std::move(p);
  out.phi = std::move(phi);
  out.births = std::move(births);
  return out;
}

}  // namespace dhmc::models

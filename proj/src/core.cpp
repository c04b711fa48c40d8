#include "dhmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dhmc/embedding.hpp"

namespace dhmc {

Partition Partition::all_smooth(std::size_t d) {
  Partition part;
  part.smooth.resize(d);
  std::iota(part.smooth.begin(), part.smooth.end(), std::size_t{0});
  return part;
}

Partition Partition::all_disc(std::size_t d) {
  Partition part;
  part.disc.resize(d);
  std::iota(part.disc.begin(), part.disc.end(), std::size_t{0});
  return part;
}

Partition Partition::from_disc(std::size_t d, std::vector<std::size_t> disc) {
  std::sort(disc.begin(), disc.end());
  disc.erase(std::unique(disc.begin(), disc.end()), disc.end());
  Partition part;
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (k < disc.size() && disc[k] == i) {
      ++k;
    } else {
      part.smooth.push_back(i);
    }
  }
  if (k != disc.size()) throw ContractError("discontinuous index out of range");
  part.disc = std::move(disc);
  return part;
}

void Partition::validate(std::size_t d) const {
  if (dim() != d) throw ContractError("partition does not cover the parameter dimension");
  std::vector<char> seen(d, 0);
  auto mark = [&](const std::vector<std::size_t>& idx) {
    if (!std::is_sorted(idx.begin(), idx.end())) throw ContractError("partition indices must be sorted");
    for (auto i : idx) {
      if (i >= d || seen[i]) throw ContractError("partition blocks overlap or go out of range");
      seen[i] = 1;
    }
  };
  mark(smooth);
  mark(disc);
}

void MassSpec::validate(const Partition& part) const {
  if (diag.size() != part.dim()) throw ContractError("mass dimension does not match partition");
  for (double m : diag) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ContractError("mass entries must be finite and positive");
  }
  if (smooth_chol) {
    const auto n = static_cast<Eigen::Index>(part.smooth.size());
    if (smooth_chol->rows() != n || smooth_chol->cols() != n) {
      throw ContractError("dense smooth mass factor has the wrong shape");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!((*smooth_chol)(i, i) > 0.0)) throw ContractError("dense smooth mass factor is not positive definite");
    }
  }
}

void PhaseState::validate() const {
  if (theta.empty()) throw ContractError("phase state must have dimension >= 1");
  if (theta.size() != p.size()) throw ContractError("theta and p lengths differ");
  part.validate(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i]) || !std::isfinite(p[i])) throw ContractError("phase state has non-finite entries");
  }
}

void TargetModel::gradient(std::span<const double>, std::span<double>) const {
  throw ContractError(name() + " does not provide a gradient");
}

double TargetModel::potential_diff(std::span<const double> theta, std::size_t j, double value,
                                   ModelWorkspace*) const {
  return potential_diff_by_evaluation(*this, theta, j, value);
}

Partition TargetModel::default_partition() const {
  return has_gradient() ? Partition::all_smooth(dim()) : Partition::all_disc(dim());
}

std::vector<double> TargetModel::initial_point() const {
  std::vector<double> x(dim(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (const auto* map = embedding(j)) {
      x[j] = map->embed_center((map->first_value() + map->last_value()) / 2);
    }
  }
  return x;
}

std::vector<std::string> TargetModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < dim(); ++j) names.push_back("theta" + std::to_string(j));
  return names;
}

const EmbeddingMap* TargetModel::embedding(std::size_t) const { return nullptr; }

void TargetModel::derived(std::span<const double>, std::vector<double>& out) const { out.clear(); }

double checked_potential(const TargetModel& model, std::span<const double> theta) {
  const double u = model.potential(theta);
  if (std::isnan(u)) throw ModelError(model.name() + " returned NaN potential");
  return u;
}

double potential_diff_by_evaluation(const TargetModel& model, std::span<const double> theta,
                                    std::size_t j, double value) {
  const double before = checked_potential(model, theta);
  if (std::isinf(before)) throw ContractError("potential difference taken outside the support");
  std::vector<double> moved(theta.begin(), theta.end());
  moved[j] = value;
  return checked_potential(model, moved) - before;
}

namespace {

// M^{-1} p for M = L L^T.
Eigen::VectorXd dense_inverse_apply(const Eigen::MatrixXd& chol, const Eigen::VectorXd& p) {
  const auto lower = chol.triangularView<Eigen::Lower>();
  Eigen::VectorXd y = lower.solve(p);
  return lower.transpose().solve(y);
}

Eigen::VectorXd gather(std::span<const double> v, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[idx[k]];
  return out;
}

void check_dims(std::span<const double> p, const MassSpec& mass, const Partition& part) {
  if (p.size() != part.dim() || mass.diag.size() != part.dim()) {
    throw ContractError("momentum, mass and partition dimensions disagree");
  }
}

}  // namespace

double kinetic_energy(std::span<const double> p, const MassSpec& mass, const Partition& part) {
  check_dims(p, mass, part);
  double k = 0.0;
  if (mass.smooth_chol) {
    const Eigen::VectorXd pi = gather(p, part.smooth);
    const Eigen::VectorXd z = mass.smooth_chol->triangularView<Eigen::Lower>().solve(pi);
    k += 0.5 * z.squaredNorm();
  } else {
    for (auto i : part.smooth) k += 0.5 * p[i] * p[i] / mass.diag[i];
  }
  for (auto j : part.disc) k += std::abs(p[j]) / mass.diag[j];
  return k;
}

EnergyLedger hamiltonian(const TargetModel& model, const PhaseState& state, const MassSpec& mass) {
  EnergyLedger e;
  e.potential = checked_potential(model, state.theta);
  e.kinetic = kinetic_energy(state.p, mass, state.part);
  e.hamiltonian = std::isinf(e.potential) ? kInf : e.potential + e.kinetic;
  return e;
}

std::vector<double> sample_momentum(Rng& rng, const MassSpec& mass, const Partition& part) {
  const std::size_t d = part.dim();
  if (mass.diag.size() != d) throw ContractError("mass dimension does not match partition");
  std::vector<char> is_disc(d, 0);
  for (auto j : part.disc) is_disc[j] = 1;

  std::vector<double> p(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (is_disc[i]) {
      const double s = sign_from_uniform(rng.uniform());
      p[i] = s * mass.diag[i] * rng.exponential();
    } else {
      p[i] = rng.normal();
    }
  }
  if (mass.smooth_chol) {
    const Eigen::VectorXd z = gather(p, part.smooth);
    const Eigen::VectorXd pi = mass.smooth_chol->triangularView<Eigen::Lower>() * z;
    for (std::size_t k = 0; k < part.smooth.size(); ++k) p[part.smooth[k]] = pi(static_cast<Eigen::Index>(k));
  } else {
    for (auto i : part.smooth) p[i] *= std::sqrt(mass.diag[i]);
  }
  return p;
}

void smooth_velocity(std::span<const double> p, const MassSpec& mass, const Partition& part,
                     std::span<double> velocity) {
  if (mass.smooth_chol) {
    const Eigen::VectorXd v = dense_inverse_apply(*mass.smooth_chol, gather(p, part.smooth));
    for (std::size_t k = 0; k < part.smooth.size(); ++k) velocity[part.smooth[k]] = v(static_cast<Eigen::Index>(k));
  } else {
    for (auto i : part.smooth) velocity[i] = p[i] / mass.diag[i];
  }
}

}  // namespace dhmc

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhmc/errors.hpp"
#include "dhmc/rng.hpp"

namespace dhmc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class EmbeddingMap;

// Split of the coordinates {0..d-1} into the block along which the potential
// is smooth (Gaussian momentum, leapfrog-style updates) and the block updated
// coordinate-wise with Laplace momentum.
struct Partition {
  std::vector<std::size_t> smooth;
  std::vector<std::size_t> disc;

  static Partition all_smooth(std::size_t d);
  static Partition all_disc(std::size_t d);
  // Builds the partition from the discontinuous index set; the rest is smooth.
  static Partition from_disc(std::size_t d, std::vector<std::size_t> disc);

  std::size_t dim() const { return smooth.size() + disc.size(); }
  // Throws ContractError unless the two sets are sorted, disjoint and cover {0..d-1}.
  void validate(std::size_t d) const;
};

// Momentum scales. `diag[i]` is M_ii for a smooth coordinate and the Laplace
// scale m_i for a discontinuous one. A dense smooth-block mass is given by
// its lower Cholesky factor, ordered like Partition::smooth.
struct MassSpec {
  std::vector<double> diag;
  std::optional<Eigen::MatrixXd> smooth_chol;

  static MassSpec identity(std::size_t d) { return MassSpec{std::vector<double>(d, 1.0), std::nullopt}; }
  void validate(const Partition& part) const;
};

// Position, momentum and the block structure they are integrated under.
struct PhaseState {
  std::vector<double> theta;
  std::vector<double> p;
  Partition part;

  std::size_t dim() const { return theta.size(); }
  // Checks the PhaseState invariants: equal lengths, valid partition, finite entries.
  void validate() const;
};

struct EnergyLedger {
  double potential = 0.0;
  double kinetic = 0.0;
  double hamiltonian = 0.0;
};

// Per-chain scratch state a model may use to evaluate coordinate-wise
// potential differences incrementally. Never shared between chains.
class ModelWorkspace {
 public:
  virtual ~ModelWorkspace() = default;
};

// A target distribution exp(-U(theta)). U is +inf off the support and must
// never be NaN. Implementations are immutable and safe for concurrent reads.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual double potential(std::span<const double> theta) const = 0;

  virtual bool has_gradient() const { return false; }
  // dU/dtheta_i for every coordinate along which U is smooth. Entries for
  // discontinuous coordinates are left unspecified. Only called where U is finite.
  virtual void gradient(std::span<const double> theta, std::span<double> grad) const;

  virtual bool has_potential_diff() const { return false; }
  // U(theta with theta_j <- value) - U(theta). The default uses two potential calls.
  virtual double potential_diff(std::span<const double> theta, std::size_t j, double value,
                                ModelWorkspace* ws) const;
  virtual std::unique_ptr<ModelWorkspace> make_workspace() const { return nullptr; }

  // Smooth block = coordinates with a gradient; discontinuous block = the rest.
  virtual Partition default_partition() const;
  virtual std::vector<double> initial_point() const;
  virtual std::vector<std::string> parameter_names() const;
  // Non-null for coordinates that embed an ordinal parameter.
  virtual const EmbeddingMap* embedding(std::size_t j) const;
  // Extra reported quantities (constrained-scale parameters and the like).
  virtual std::vector<std::string> derived_names() const { return {}; }
  virtual void derived(std::span<const double> theta, std::vector<double>& out) const;
};

// U(theta), raising ModelError on NaN.
double checked_potential(const TargetModel& model, std::span<const double> theta);

// U(theta with theta_j <- value) - U(theta) from two potential calls.
// ContractError when U(theta) is infinite.
double potential_diff_by_evaluation(const TargetModel& model, std::span<const double> theta,
                                    std::size_t j, double value);

double kinetic_energy(std::span<const double> p, const MassSpec& mass, const Partition& part);

EnergyLedger hamiltonian(const TargetModel& model, const PhaseState& state, const MassSpec& mass);

// p_I ~ Normal(0, M_I), p_j ~ Laplace(scale m_j). Randomness is consumed in
// coordinate order; a Laplace draw takes one uniform for the sign and one
// for the Exp(1) magnitude.
std::vector<double> sample_momentum(Rng& rng, const MassSpec& mass, const Partition& part);

// sign(0) := +1.
inline double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Sign drawn from a single uniform; shared by the Laplace sampler and the
// Metropolis-within-Gibbs proposal so the two consume randomness identically.
inline double sign_from_uniform(double u) { return u < 0.5 ? -1.0 : 1.0; }

// M_I^{-1} p_I written into `velocity` at the smooth indices.
void smooth_velocity(std::span<const double> p, const MassSpec& mass, const Partition& part,
                     std::span<double> velocity);

}  // namespace dhmc

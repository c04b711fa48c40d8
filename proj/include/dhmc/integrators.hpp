#pragma once

#include <cstddef>
#include <vector>

#include "dhmc/core.hpp"

namespace dhmc {

// Counters accumulated by an integrator call. The state itself is updated in place.
struct StepOutcome {
  std::size_t flips = 0;
  std::size_t potential_evals = 0;
  std::size_t gradient_evals = 0;
  std::size_t coord_updates = 0;
  std::size_t events = 0;
  bool divergent = false;
  // Sum of the potential increments paid by coordinate-wise updates and events.
  double delta_potential = 0.0;

  StepOutcome& operator+=(const StepOutcome& o);
};

// Order in which the discontinuous coordinates are swept.
struct SweepOrder {
  std::vector<std::size_t> perm;

  // Uniform random permutation of part.disc.
  static SweepOrder random(const Partition& part, Rng& rng);
  static SweepOrder identity(const Partition& part) { return SweepOrder{part.disc}; }
  SweepOrder reversed() const;
};

// Gradient and potential at the current position, reused between smooth steps
// so each step pays for one gradient instead of two.
struct SmoothCache {
  std::vector<double> grad;
  bool grad_valid = false;
  double potential = 0.0;
  bool potential_valid = false;

  void invalidate() { grad_valid = potential_valid = false; }
};

// One coordinate-wise Laplace update of theta_j. Bounces on ties and on any
// infinite increment. Requires U(theta) finite. Only the endpoints are
// evaluated, so a barrier narrower than eps / m_j can be jumped over.
StepOutcome coord_step(const TargetModel& model, PhaseState& state, std::size_t j, double eps,
                       const MassSpec& mass, ModelWorkspace* ws = nullptr);

StepOutcome coord_sweep(const TargetModel& model, PhaseState& state, const SweepOrder& order,
                        double eps, const MassSpec& mass, ModelWorkspace* ws = nullptr);

// Half kick and half drift on the smooth block, full sweep of the
// discontinuous block, then half drift and half kick. When the drift leaves
// the support the step stops early with `divergent` set.
StepOutcome dhmc_step(const TargetModel& model, PhaseState& state, const SweepOrder& order,
                      double eps, const MassSpec& mass, SmoothCache& cache,
                      ModelWorkspace* ws = nullptr);

// Kick-drift-kick on a state whose partition has no discontinuous block.
StepOutcome leapfrog_step(const TargetModel& model, PhaseState& state, double eps,
                          const MassSpec& mass, SmoothCache& cache);

// Exact Gaussian-momentum dynamics for a target that is constant on the
// axis-aligned cells spanned by each coordinate's embedding knots. Uses the
// diagonal of `mass`; advances time `eps`.
StepOutcome gaussian_event_step(const TargetModel& model, PhaseState& state, double eps,
                                const MassSpec& mass);

// Momentum after meeting a potential jump `delta_u` with kinetic scale `m`:
// refract when p^2/(2m) > delta_u, else reflect.
double refract_or_reflect(double p, double delta_u, double m);

}  // namespace dhmc

#include "dhmc/integrators.hpp"

#include <cmath>
#include <string>

#include "dhmc/embedding.hpp"

namespace dhmc {

StepOutcome& StepOutcome::operator+=(const StepOutcome& o) {
  flips += o.flips;
  potential_evals += o.potential_evals;
  gradient_evals += o.gradient_evals;
  coord_updates += o.coord_updates;
  events += o.events;
  divergent = divergent || o.divergent;
  delta_potential += o.delta_potential;
  return *this;
}

SweepOrder SweepOrder::random(const Partition& part, Rng& rng) {
  SweepOrder order{part.disc};
  rng.shuffle(order.perm);
  return order;
}

SweepOrder SweepOrder::reversed() const { return SweepOrder{{perm.rbegin(), perm.rend()}}; }

StepOutcome coord_step(const TargetModel& model, PhaseState& state, std::size_t j, double eps,
                       const MassSpec& mass, ModelWorkspace* ws) {
  if (!(eps > 0.0)) throw ContractError("stepsize must be positive");
  if (j >= state.dim()) throw ContractError("coordinate index out of range");
  StepOutcome out;
  out.coord_updates = 1;

  const double m = mass.diag[j];
  const double s = sign_of(state.p[j]);
  const double proposal = state.theta[j] + eps / m * s;

  double du;
  if (model.has_potential_diff()) {
    du = model.potential_diff(state.theta, j, proposal, ws);
    out.potential_evals = 1;
  } else {
    du = potential_diff_by_evaluation(model, state.theta, j, proposal);
    out.potential_evals = 2;
  }
  if (std::isnan(du)) throw ModelError(model.name() + " returned a NaN potential difference");

  if (std::abs(state.p[j]) / m > du) {
    state.theta[j] = proposal;
    state.p[j] -= s * m * du;
    out.delta_potential = du;
  } else {
    state.p[j] = -state.p[j];
    out.flips = 1;
  }
  return out;
}

StepOutcome coord_sweep(const TargetModel& model, PhaseState& state, const SweepOrder& order,
                        double eps, const MassSpec& mass, ModelWorkspace* ws) {
  StepOutcome out;
  for (auto j : order.perm) out += coord_step(model, state, j, eps, mass, ws);
  return out;
}

namespace {

// Gradient at the current position into cache.grad; false when it diverges.
bool refresh_gradient(const TargetModel& model, const PhaseState& state, SmoothCache& cache,
                      StepOutcome& out) {
  cache.grad.assign(state.dim(), 0.0);
  model.gradient(state.theta, cache.grad);
  ++out.gradient_evals;
  for (auto i : state.part.smooth) {
    if (std::isnan(cache.grad[i])) throw ModelError(model.name() + " returned a NaN gradient");
    if (std::isinf(cache.grad[i])) return false;
  }
  cache.grad_valid = true;
  return true;
}

void kick(PhaseState& state, const SmoothCache& cache, double h) {
  for (auto i : state.part.smooth) state.p[i] -= h * cache.grad[i];
}

void drift(PhaseState& state, const MassSpec& mass, double h, std::vector<double>& velocity) {
  velocity.assign(state.dim(), 0.0);
  smooth_velocity(state.p, mass, state.part, velocity);
  for (auto i : state.part.smooth) state.theta[i] += h * velocity[i];
}

// Evaluates U after a drift; false when the drift left the support.
bool check_support(const TargetModel& model, const PhaseState& state, SmoothCache& cache,
                   StepOutcome& out) {
  cache.potential = checked_potential(model, state.theta);
  cache.potential_valid = true;
  ++out.potential_evals;
  return std::isfinite(cache.potential);
}

}  // namespace

StepOutcome dhmc_step(const TargetModel& model, PhaseState& state, const SweepOrder& order,
                      double eps, const MassSpec& mass, SmoothCache& cache, ModelWorkspace* ws) {
  if (!(eps > 0.0)) throw ContractError("stepsize must be positive");
  if (state.part.smooth.empty()) return coord_sweep(model, state, order, eps, mass, ws);

  StepOutcome out;
  const double h = 0.5 * eps;
  std::vector<double> velocity;

  if (!cache.grad_valid && !refresh_gradient(model, state, cache, out)) {
    out.divergent = true;
    return out;
  }
  kick(state, cache, h);
  drift(state, mass, h, velocity);
  cache.invalidate();

  if (!order.perm.empty()) {
    if (!check_support(model, state, cache, out)) {
      out.divergent = true;
      return out;
    }
    out += coord_sweep(model, state, order, eps, mass, ws);
  }

  drift(state, mass, h, velocity);
  if (!check_support(model, state, cache, out) || !refresh_gradient(model, state, cache, out)) {
    out.divergent = true;
    return out;
  }
  kick(state, cache, h);
  return out;
}

StepOutcome leapfrog_step(const TargetModel& model, PhaseState& state, double eps,
                          const MassSpec& mass, SmoothCache& cache) {
  if (!state.part.disc.empty()) throw ContractError("leapfrog requires every coordinate to be smooth");
  return dhmc_step(model, state, SweepOrder{}, eps, mass, cache, nullptr);
}

double refract_or_reflect(double p, double delta_u, double m) {
  if (p * p / (2.0 * m) > delta_u) return sign_of(p) * std::sqrt(p * p - 2.0 * m * delta_u);
  return -p;
}

StepOutcome gaussian_event_step(const TargetModel& model, PhaseState& state, double eps,
                                const MassSpec& mass) {
  if (!(eps > 0.0)) throw ContractError("stepsize must be positive");
  if (!state.part.disc.empty()) throw ContractError("event-driven step uses Gaussian momentum on every coordinate");
  if (mass.smooth_chol) throw ContractError("event-driven step requires a diagonal mass");
  const std::size_t d = state.dim();

  std::vector<const EmbeddingMap*> maps(d);
  std::vector<std::size_t> cells(d);
  std::vector<double> probe(d);
  for (std::size_t i = 0; i < d; ++i) {
    maps[i] = model.embedding(i);
    if (!maps[i]) throw UnsupportedTarget(model.name() + " is not piecewise constant on a grid");
    const auto c = maps[i]->interval(state.theta[i]);
    if (!c) throw ContractError("event-driven step started outside the grid");
    cells[i] = *c;
    probe[i] = 0.5 * (maps[i]->knots()[*c] + maps[i]->knots()[*c + 1]);
  }

  StepOutcome out;
  double u_cur = 0.0;
  bool have_u = false;
  double remaining = eps;
  constexpr double kTieTol = 1e-12;

  while (true) {
    std::size_t axis = d;
    double t_hit = kInf;
    double boundary = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = state.p[i] / mass.diag[i];
      if (v == 0.0) continue;
      const auto knots = maps[i]->knots();
      const double b = v > 0.0 ? knots[cells[i] + 1] : knots[cells[i]];
      const double t = std::max(0.0, (b - state.theta[i]) / v);
      if (t < t_hit - kTieTol) {
        t_hit = t;
        axis = i;
        boundary = b;
      }
    }
    if (axis == d || t_hit >= remaining) {
      for (std::size_t i = 0; i < d; ++i) state.theta[i] += remaining * state.p[i] / mass.diag[i];
      break;
    }

    for (std::size_t i = 0; i < d; ++i) state.theta[i] += t_hit * state.p[i] / mass.diag[i];
    state.theta[axis] = boundary;
    remaining -= t_hit;
    ++out.events;

    const std::size_t c = cells[axis];
    const bool up = state.p[axis] > 0.0;
    const bool inside = up ? c + 1 < maps[axis]->size() : c > 0;
    double du = kInf;
    double u_new = kInf;
    if (inside) {
      if (!have_u) {
        u_cur = checked_potential(model, probe);
        ++out.potential_evals;
        if (std::isinf(u_cur)) throw ContractError("event-driven step started outside the support");
        have_u = true;
      }
      const std::size_t nc = up ? c + 1 : c - 1;
      const auto knots = maps[axis]->knots();
      probe[axis] = 0.5 * (knots[nc] + knots[nc + 1]);
      u_new = checked_potential(model, probe);
      ++out.potential_evals;
      du = u_new - u_cur;
    }

    const double p_old = state.p[axis];
    const double p_new = refract_or_reflect(p_old, du, mass.diag[axis]);
    state.p[axis] = p_new;
    if (sign_of(p_new) == sign_of(p_old)) {
      cells[axis] = up ? c + 1 : c - 1;
      u_cur = u_new;
      out.delta_potential += du;
    } else {
      const auto knots = maps[axis]->knots();
      probe[axis] = 0.5 * (knots[c] + knots[c + 1]);
      ++out.flips;
    }
  }
  return out;
}

}  // namespace dhmc

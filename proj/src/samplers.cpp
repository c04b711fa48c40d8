#include "dhmc/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "dhmc/tuning.hpp"

namespace dhmc {

Kernel parse_kernel(std::string_view name) {
  if (name == "dhmc") return Kernel::dhmc;
  if (name == "dhmc_coordwise") return Kernel::dhmc_coordwise;
  if (name == "hmc") return Kernel::hmc;
  if (name == "mwg") return Kernel::mwg;
  if (name == "rwm") return Kernel::rwm;
  throw ConfigError("kernel", "unknown kernel '" + std::string(name) + "'");
}

std::string to_string(Kernel k) {
  switch (k) {
    case Kernel::dhmc: return "dhmc";
    case Kernel::dhmc_coordwise: return "dhmc_coordwise";
    case Kernel::hmc: return "hmc";
    case Kernel::mwg: return "mwg";
    case Kernel::rwm: return "rwm";
  }
  return "unknown";
}

void SamplerConfig::set_stepsize(double eps0) {
  eps_min = 0.8 * eps0;
  eps_max = eps0;
}

void SamplerConfig::set_path_length(int l0) {
  path_len_max = l0;
  path_len_min = static_cast<int>(std::ceil(0.9 * l0));
}

void SamplerConfig::validate() const {
  if (!(eps_min > 0.0) || !std::isfinite(eps_min)) throw ConfigError("eps_min", "eps_min must be positive");
  if (!(eps_max >= eps_min) || !std::isfinite(eps_max)) {
    throw ConfigError("eps_min", "eps_min must not exceed eps_max");
  }
  if (path_len_min < 1) throw ConfigError("path_len", "path length must be at least 1");
  if (path_len_max < path_len_min) throw ConfigError("path_len", "path_len_min must not exceed path_len_max");
  if (thin < 1) throw ConfigError("thin", "thin must be at least 1");
  if (!(rwm_scale >= 0.0) || !std::isfinite(rwm_scale)) throw ConfigError("rwm_scale", "rwm_scale must be >= 0");
  if (target_stat && !(*target_stat > 0.0 && *target_stat < 1.0)) {
    throw ConfigError("target_stat", "target_stat must lie in (0, 1)");
  }
  if (adapt_mass && n_warmup < 40) throw ConfigError("n_warmup", "mass adaptation needs at least 40 warmup iterations");
}

double default_target_stat(Kernel k) {
  switch (k) {
    case Kernel::rwm: return 0.234;
    case Kernel::mwg: return 0.44;
    default: return 0.8;
  }
}

Partition kernel_partition(const TargetModel& model, const SamplerConfig& cfg) {
  const std::size_t d = model.dim();
  switch (cfg.kernel) {
    case Kernel::dhmc: {
      Partition part = cfg.partition.value_or(model.default_partition());
      part.validate(d);
      if (!part.smooth.empty() && !model.has_gradient()) {
        throw ConfigError("partition", model.name() + " has no gradient for a smooth block");
      }
      return part;
    }
    case Kernel::dhmc_coordwise:
    case Kernel::mwg:
      return Partition::all_disc(d);
    case Kernel::hmc:
      if (!model.has_gradient()) throw ConfigError("kernel", "hmc needs a model gradient");
      return Partition::all_smooth(d);
    case Kernel::rwm:
      return Partition::all_smooth(d);
  }
  throw ConfigError("kernel", "unknown kernel");
}

namespace {

int draw_path_length(const SamplerConfig& cfg, Rng& rng) {
  if (cfg.path_len_max == cfg.path_len_min) return cfg.path_len_min;
  const auto span = static_cast<std::size_t>(cfg.path_len_max - cfg.path_len_min + 1);
  return cfg.path_len_min + static_cast<int>(rng.index(span));
}

double current_potential(const TargetModel& model, const PhaseState& state, ChainContext& ctx,
                         KernelTrace& tr) {
  if (!ctx.cache.potential_valid) {
    ctx.cache.potential = checked_potential(model, state.theta);
    ctx.cache.potential_valid = true;
    ++tr.potential_evals;
  }
  if (std::isinf(ctx.cache.potential)) throw ContractError("chain state is outside the support");
  return ctx.cache.potential;
}

double accept_probability(double delta_h) { return delta_h <= 0.0 ? 1.0 : std::exp(-delta_h); }

// Shared by dhmc and hmc: L integrator steps under state.part, MH correction
// only when the smooth block is nonempty.
KernelTrace hamiltonian_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                                   const MassSpec& mass, Rng& rng, ChainContext& ctx) {
  KernelTrace tr;
  tr.eps_used = rng.uniform(cfg.eps_min, cfg.eps_max);
  tr.path_len = draw_path_length(cfg, rng);
  state.p = sample_momentum(rng, mass, state.part);
  const SweepOrder order = SweepOrder::random(state.part, rng);

  const bool smooth = !state.part.smooth.empty();
  const std::vector<double> theta0 = state.theta;
  const double k0 = kinetic_energy(state.p, mass, state.part);
  double u0 = 0.0;
  SmoothCache saved;
  if (smooth) {
    u0 = current_potential(model, state, ctx, tr);
    saved = ctx.cache;
  }

  StepOutcome acc;
  for (int l = 0; l < tr.path_len && !acc.divergent; ++l) {
    acc += dhmc_step(model, state, order, tr.eps_used, mass, ctx.cache, ctx.workspace.get());
  }
  tr.flips = acc.flips;
  tr.coord_updates = acc.coord_updates;
  tr.potential_evals += acc.potential_evals;
  tr.gradient_evals = acc.gradient_evals;
  tr.divergent = acc.divergent;

  if (acc.divergent) {
    tr.delta_H = kInf;
    tr.accept_prob = 0.0;
    tr.accepted = false;
  } else {
    const double k1 = kinetic_energy(state.p, mass, state.part);
    tr.delta_H = smooth ? (ctx.cache.potential - u0) + (k1 - k0) : acc.delta_potential + (k1 - k0);
    tr.accept_prob = accept_probability(tr.delta_H);
    // Without a smooth block the integrator is exact and the move is never rejected.
    tr.accepted = smooth ? std::log(rng.uniform()) < -tr.delta_H : true;
  }
  if (!tr.accepted) {
    state.theta = theta0;
    ctx.cache = std::move(saved);
  }
  return tr;
}

}  // namespace

KernelTrace dhmc_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                            const MassSpec& mass, Rng& rng, ChainContext& ctx) {
  return hamiltonian_transition(model, state, cfg, mass, rng, ctx);
}

KernelTrace hmc_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           const MassSpec& mass, Rng& rng, ChainContext& ctx) {
  if (!state.part.disc.empty()) throw ContractError("hmc requires every coordinate to be smooth");
  return hamiltonian_transition(model, state, cfg, mass, rng, ctx);
}

KernelTrace mwg_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           const MassSpec& mass, Rng& rng, ChainContext& ctx) {
  const std::size_t d = state.dim();
  KernelTrace tr;
  tr.eps_used = rng.uniform(cfg.eps_min, cfg.eps_max);
  tr.path_len = 1;

  // Per coordinate, in index order: proposal direction, then acceptance uniform.
  std::vector<double> direction(d), log_u(d);
  for (std::size_t j = 0; j < d; ++j) {
    direction[j] = sign_from_uniform(rng.uniform());
    log_u[j] = std::log(rng.uniform());
  }
  const SweepOrder order = SweepOrder::random(state.part, rng);

  for (auto j : order.perm) {
    const double proposal = state.theta[j] + tr.eps_used / mass.diag[j] * direction[j];
    double du;
    if (model.has_potential_diff()) {
      du = model.potential_diff(state.theta, j, proposal, ctx.workspace.get());
      tr.potential_evals += 1;
    } else {
      du = potential_diff_by_evaluation(model, state.theta, j, proposal);
      tr.potential_evals += 2;
    }
    if (std::isnan(du)) throw ModelError(model.name() + " returned a NaN potential difference");
    ++tr.coord_updates;
    if (log_u[j] < -du) {
      state.theta[j] = proposal;
    } else {
      ++tr.flips;
    }
  }
  ctx.cache.invalidate();
  tr.accepted = tr.flips < tr.coord_updates;
  tr.accept_prob = tr.coord_updates ? 1.0 - static_cast<double>(tr.flips) / static_cast<double>(tr.coord_updates) : 1.0;
  return tr;
}

KernelTrace rwm_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           Rng& rng, ChainContext& ctx) {
  const std::size_t d = state.dim();
  KernelTrace tr;
  tr.eps_used = cfg.rwm_scale;
  tr.path_len = 1;
  const double u0 = current_potential(model, state, ctx, tr);

  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) z(static_cast<Eigen::Index>(i)) = rng.normal();
  if (cfg.rwm_chol) {
    if (cfg.rwm_chol->rows() != z.size() || cfg.rwm_chol->cols() != z.size()) {
      throw ConfigError("rwm_chol", "proposal factor has the wrong shape");
    }
    z = cfg.rwm_chol->triangularView<Eigen::Lower>() * z;
  }
  std::vector<double> proposal(state.theta);
  for (std::size_t i = 0; i < d; ++i) proposal[i] += cfg.rwm_scale * z(static_cast<Eigen::Index>(i));

  const double u1 = checked_potential(model, proposal);
  ++tr.potential_evals;
  tr.delta_H = std::isinf(u1) ? kInf : u1 - u0;
  tr.accept_prob = accept_probability(tr.delta_H);
  tr.accepted = std::log(rng.uniform()) < -tr.delta_H;
  if (tr.accepted) {
    state.theta = std::move(proposal);
    ctx.cache.potential = u1;
    ctx.cache.grad_valid = false;
  }
  return tr;
}

KernelTrace transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                       const MassSpec& mass, Rng& rng, ChainContext& ctx) {
  switch (cfg.kernel) {
    case Kernel::dhmc:
    case Kernel::dhmc_coordwise: return dhmc_transition(model, state, cfg, mass, rng, ctx);
    case Kernel::hmc: return hmc_transition(model, state, cfg, mass, rng, ctx);
    case Kernel::mwg: return mwg_transition(model, state, cfg, mass, rng, ctx);
    case Kernel::rwm: return rwm_transition(model, state, cfg, rng, ctx);
  }
  throw ConfigError("kernel", "unknown kernel");
}

double tuning_statistic(Kernel k, const Partition& part, const KernelTrace& t) {
  switch (k) {
    case Kernel::hmc:
    case Kernel::rwm: return t.accept_prob;
    case Kernel::mwg:
    case Kernel::dhmc_coordwise: return t.coord_updates ? flip_statistic(t.flips, t.coord_updates) : 0.0;
    case Kernel::dhmc:
      if (part.disc.empty()) return t.accept_prob;
      if (t.coord_updates == 0) return 0.0;
      if (part.smooth.empty()) return flip_statistic(t.flips, t.coord_updates);
      return std::min(flip_statistic(t.flips, t.coord_updates), t.accept_prob);
  }
  return t.accept_prob;
}

namespace {

constexpr double kLogEpsMin = -16.0;  // ~1e-7
constexpr double kLogEpsMax = 9.0;    // ~8e3

void apply_scale(SamplerConfig& run, const SamplerConfig& base, double log_eps) {
  const double e = std::exp(std::clamp(log_eps, kLogEpsMin, kLogEpsMax));
  if (run.kernel == Kernel::rwm) {
    run.rwm_scale = e;
  } else {
    run.eps_max = e;
    run.eps_min = e * (base.eps_min / base.eps_max);
  }
}

}  // namespace

ChainResult run_chain(const TargetModel& model, std::vector<double> init, const SamplerConfig& cfg) {
  cfg.validate();
  const std::size_t d = model.dim();
  if (init.size() != d) throw ContractError("initial point has the wrong dimension");
  Rng rng(cfg.seed);

  PhaseState state{std::move(init), std::vector<double>(d, 0.0), kernel_partition(model, cfg)};
  state.validate();
  MassSpec mass = cfg.mass.value_or(MassSpec::identity(d));
  mass.validate(state.part);
  if (std::isinf(checked_potential(model, state.theta))) {
    throw ContractError("initial point is outside the support");
  }

  ChainContext ctx(model);
  SamplerConfig run = cfg;
  ChainResult res;
  res.tuning.target_stat = cfg.target_stat.value_or(default_target_stat(cfg.kernel));

  const double scale0 = cfg.kernel == Kernel::rwm ? cfg.rwm_scale : cfg.eps_max;
  const bool tune_eps = cfg.adapt_stepsize && scale0 > 0.0;
  TuneState ts = tune_eps ? TuneState(scale0, res.tuning.target_stat) : TuneState{};

  const std::size_t w = cfg.n_warmup;
  const std::size_t mass_begin = w / 4, mass_end = w / 2;
  std::vector<RunningMoments> moments(d);
  RunningMoments late;

  for (std::size_t it = 0; it < w; ++it) {
    const KernelTrace tr = transition(model, state, run, mass, rng, ctx);
    const double stat = tuning_statistic(cfg.kernel, state.part, tr);
    if (it >= w - w / 4) late.push(stat);
    if (tune_eps) {
      ts = adapt_stepsize(std::move(ts), stat);
      apply_scale(run, cfg, ts.log_eps);
    }
    if (cfg.adapt_mass) {
      if (it >= mass_begin && it < mass_end) {
        for (std::size_t i = 0; i < d; ++i) moments[i].push(state.theta[i]);
      }
      if (it + 1 == mass_end) {
        auto est = estimate_mass(moments, state.part);
        mass = std::move(est.mass);
        res.tuning.constant_coords = std::move(est.constant_coords);
        // Restart the stepsize schedule under the new metric.
        ts.iteration = 0;
      }
    }
  }

  res.tuning.adapted_stepsize = tune_eps;
  res.tuning.adapted_mass = cfg.adapt_mass;
  res.tuning.final_eps = run.eps_max;
  res.tuning.final_rwm_scale = run.rwm_scale;
  res.tuning.late_warmup_stat = late.count() ? late.mean() : 0.0;
  res.tuning.mass = mass;

  res.samples = SampleStore(model);
  const std::size_t iters = cfg.n_samples * cfg.thin;
  res.trace.reserve(iters);
  for (std::size_t it = 0; it < iters; ++it) {
    const KernelTrace tr = transition(model, state, run, mass, rng, ctx);
    res.potential_evals += tr.potential_evals;
    res.gradient_evals += tr.gradient_evals;
    if (tr.divergent) ++res.divergences;
    res.trace.push_back(tr);
    if ((it + 1) % cfg.thin == 0) res.samples.append(model, state.theta);
  }
  res.final_theta = state.theta;
  return res;
}

}  // namespace dhmc

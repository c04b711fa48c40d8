#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dhmc/core.hpp"
#include "dhmc/integrators.hpp"
#include "dhmc/store.hpp"

namespace dhmc {

enum class Kernel { dhmc, dhmc_coordwise, hmc, mwg, rwm };

Kernel parse_kernel(std::string_view name);
std::string to_string(Kernel k);

struct SamplerConfig {
  Kernel kernel = Kernel::dhmc;
  double eps_min = 0.08;
  double eps_max = 0.1;
  int path_len_min = 10;
  int path_len_max = 10;
  // Unit mass when unset.
  std::optional<MassSpec> mass;
  // Overrides the kernel's default partition (dhmc only).
  std::optional<Partition> partition;
  std::uint64_t seed = 0;
  std::size_t n_samples = 1000;
  std::size_t n_warmup = 0;
  std::size_t thin = 1;
  // Random-walk proposal: theta + rwm_scale * rwm_chol * z.
  double rwm_scale = 1.0;
  std::optional<Eigen::MatrixXd> rwm_chol;
  bool adapt_stepsize = false;
  bool adapt_mass = false;
  // Warmup target; unset picks the kernel default.
  std::optional<double> target_stat;

  // eps ~ Uniform(0.8 eps0, eps0).
  void set_stepsize(double eps0);
  // L uniform on {ceil(0.9 L0) .. L0}.
  void set_path_length(int l0);
  // Throws ConfigError naming the offending field.
  void validate() const;
};

double default_target_stat(Kernel k);

struct KernelTrace {
  bool accepted = false;
  double delta_H = 0.0;
  double accept_prob = 0.0;
  std::size_t flips = 0;
  std::size_t coord_updates = 0;
  std::size_t potential_evals = 0;
  std::size_t gradient_evals = 0;
  double eps_used = 0.0;
  int path_len = 0;
  bool divergent = false;
};

// Chain-local evaluation state carried between transitions.
struct ChainContext {
  std::unique_ptr<ModelWorkspace> workspace;
  SmoothCache cache;

  explicit ChainContext(const TargetModel& model) : workspace(model.make_workspace()) {}
};

// Partition a kernel integrates under.
Partition kernel_partition(const TargetModel& model, const SamplerConfig& cfg);

// Each transition updates state.theta in place; the momentum left in state.p
// is not carried to the next transition.
KernelTrace dhmc_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                            const MassSpec& mass, Rng& rng, ChainContext& ctx);
KernelTrace hmc_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           const MassSpec& mass, Rng& rng, ChainContext& ctx);
KernelTrace mwg_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           const MassSpec& mass, Rng& rng, ChainContext& ctx);
KernelTrace rwm_transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                           Rng& rng, ChainContext& ctx);

KernelTrace transition(const TargetModel& model, PhaseState& state, const SamplerConfig& cfg,
                       const MassSpec& mass, Rng& rng, ChainContext& ctx);

struct TuningSummary {
  bool adapted_stepsize = false;
  bool adapted_mass = false;
  double final_eps = 0.0;
  double final_rwm_scale = 0.0;
  double target_stat = 0.0;
  // Statistic averaged over the last quarter of warmup.
  double late_warmup_stat = 0.0;
  MassSpec mass;
  std::vector<std::size_t> constant_coords;
};

struct ChainResult {
  SampleStore samples;
  // One entry per post-warmup transition, including thinned-out ones.
  std::vector<KernelTrace> trace;
  TuningSummary tuning;
  std::size_t divergences = 0;
  std::size_t potential_evals = 0;
  std::size_t gradient_evals = 0;
  std::vector<double> final_theta;

  // Cost unit shared by every kernel: potential plus gradient evaluations.
  std::size_t total_evals() const { return potential_evals + gradient_evals; }
};

// Statistic that warmup adaptation drives toward the target for one transition.
double tuning_statistic(Kernel k, const Partition& part, const KernelTrace& t);

ChainResult run_chain(const TargetModel& model, std::vector<double> init, const SamplerConfig& cfg);

}  // namespace dhmc

#include "dhmc/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dhmc/app/io.hpp"
#include "dhmc/errors.hpp"
#include "dhmc/models/ar1.hpp"
#include "dhmc/models/arch_cp.hpp"
#include "dhmc/models/binomial_n.hpp"
#include "dhmc/models/gen_bayes.hpp"
#include "dhmc/models/jolly_seber.hpp"
#include "dhmc/models/synth.hpp"
#include "dhmc/models/toy.hpp"

namespace dhmc::app {

namespace fs = std::filesystem;

namespace {

// Typed access to one JSON object; `prefix` qualifies field names in errors.
class Section {
 public:
  Section(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  std::string field(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }
  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(field(key), "must be positive");
    return x;
  }
  double probability(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0 && x < 1.0)) throw ConfigError(field(key), "must lie in (0, 1)");
    return x;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo) throw ConfigError(field(key), "must be at least " + std::to_string(lo));
    return x;
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(field(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) throw ConfigError(field(key), "expected finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(field(key), "expected integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key) {
    if (!has(key)) return {};
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(field(key), "expected strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  // Call after every key has been read.
  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::vector<double> repeat_or(Section& s, const std::string& key, std::size_t n, double fallback) {
  if (s.has(key) && s.raw(key).is_number()) return std::vector<double>(n, s.number(key, fallback));
  auto v = s.numbers(key, std::vector<double>(n, fallback));
  if (v.size() != n) throw ConfigError(s.field(key), "expected " + std::to_string(n) + " entries");
  return v;
}

void require_pmf(const std::vector<double>& pmf, const std::string& field) {
  if (pmf.size() < 2) throw ConfigError(field, "needs at least two states");
  for (double w : pmf) {
    if (!(w > 0.0)) throw ConfigError(field, "weights must be positive");
  }
}

SamplerConfig parse_sampler(Section& s) {
  SamplerConfig c;
  c.kernel = Kernel::dhmc;
  if (s.has("kernel")) {
    try {
      c.kernel = parse_kernel(s.string("kernel", "dhmc"));
    } catch (const ConfigError& e) {
      throw ConfigError(s.field("kernel"), e.detail());
    }
  }
  const bool jitter = s.boolean("jitter", true);
  if (s.has("eps")) {
    if (s.has("eps_min") || s.has("eps_max")) throw ConfigError(s.field("eps"), "give eps or eps_min/eps_max, not both");
    const double eps = s.positive("eps", 0.1);
    if (jitter) {
      c.set_stepsize(eps);
    } else {
      c.eps_min = c.eps_max = eps;
    }
  } else {
    c.eps_min = s.number("eps_min", c.eps_min);
    c.eps_max = s.number("eps_max", c.eps_max);
  }
  if (s.has("path_len")) {
    if (s.has("path_len_min") || s.has("path_len_max")) {
      throw ConfigError(s.field("path_len"), "give path_len or path_len_min/path_len_max, not both");
    }
    const auto l0 = static_cast<int>(s.integer("path_len", 10, 1));
    if (jitter) {
      c.set_path_length(l0);
    } else {
      c.path_len_min = c.path_len_max = l0;
    }
  } else {
    c.path_len_min = static_cast<int>(s.integer("path_len_min", c.path_len_min, 1));
    c.path_len_max = static_cast<int>(s.integer("path_len_max", c.path_len_max, 1));
  }
  c.n_samples = static_cast<std::size_t>(s.integer("n_samples", 1000, 1));
  c.n_warmup = static_cast<std::size_t>(s.integer("n_warmup", 0, 0));
  c.thin = static_cast<std::size_t>(s.integer("thin", 1, 1));
  c.rwm_scale = s.number("rwm_scale", 1.0);
  c.adapt_stepsize = s.boolean("adapt_stepsize", c.n_warmup > 0);
  c.adapt_mass = s.boolean("adapt_mass", false);
  if (s.has("target_stat")) c.target_stat = s.number("target_stat", 0.8);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.field(e.field()), e.detail());
  }
  return c;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  Section top(j, "");
  RunConfig cfg;
  if (!top.has("model")) throw ConfigError("model", "missing model section");
  {
    const Json& mj = top.raw("model");
    if (mj.is_string()) {
      cfg.model.name = mj.get<std::string>();
    } else {
      Section m(mj, "model");
      cfg.model.name = m.string("name", "");
      if (m.has("params")) {
        cfg.model.params = m.raw("params");
        if (!cfg.model.params.is_object()) throw ConfigError("model.params", "expected an object");
      }
      if (m.has("data")) {
        fs::path p = m.string("data", "");
        if (p.is_relative()) p = base_dir / p;
        p = fs::absolute(p).lexically_normal();
        if (!fs::exists(p)) throw ConfigError("model.data", "file not found: " + p.string());
        cfg.model.data = p;
      }
      cfg.model.synth_seed = m.unsigned_integer("synth_seed", 1);
      m.reject_unknown();
    }
    const auto names = model_names();
    if (std::find(names.begin(), names.end(), cfg.model.name) == names.end()) {
      throw ConfigError("model.name", "unknown model '" + cfg.model.name + "'");
    }
  }

  const std::uint64_t seed = top.unsigned_integer("seed", 0);
  if (top.has("sampler")) {
    Section s(top.raw("sampler"), "sampler");
    cfg.sampler = parse_sampler(s);
    if (s.has("mass")) {
      const Json& mv = s.raw("mass");
      cfg.mass_diag = mv.is_number() ? std::vector<double>{s.number("mass", 1.0)} : s.numbers("mass", {});
      if (cfg.mass_diag.empty()) throw ConfigError("sampler.mass", "needs at least one entry");
      for (double m : cfg.mass_diag) {
        if (!(m > 0.0)) throw ConfigError("sampler.mass", "entries must be positive");
      }
    }
    if (s.has("disc_coords")) {
      std::vector<std::size_t> disc;
      for (auto k : s.integers("disc_coords", {})) {
        if (k < 0) throw ConfigError("sampler.disc_coords", "indices must be nonnegative");
        disc.push_back(static_cast<std::size_t>(k));
      }
      cfg.disc_coords = disc;
    }
    s.reject_unknown();
  } else {
    cfg.sampler = SamplerConfig{};
  }
  cfg.sampler.seed = seed;

  cfg.chains = static_cast<std::size_t>(top.integer("chains", 1, 1));
  cfg.output_dir = top.string("output_dir", "run");
  if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  const std::string fmt = top.string("format", "csv");
  if (fmt == "csv") {
    cfg.format = Format::csv;
  } else if (fmt == "jsonl") {
    cfg.format = Format::jsonl;
  } else {
    throw ConfigError("format", "expected csv or jsonl, got '" + fmt + "'");
  }
  if (top.has("init")) cfg.init = top.numbers("init", {});
  if (top.has("diagnostics")) {
    Section d(top.raw("diagnostics"), "diagnostics");
    cfg.ess_columns = d.strings("columns");
    cfg.batches = static_cast<std::size_t>(d.integer("batches", 25, 2));
    d.reject_unknown();
  }
  top.reject_unknown();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("--config", "file not found: " + path.string());
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

Json to_json(const RunConfig& cfg) {
  const auto& s = cfg.sampler;
  Json sampler = {
      {"kernel", to_string(s.kernel)},
      {"eps_min", s.eps_min},
      {"eps_max", s.eps_max},
      {"path_len_min", s.path_len_min},
      {"path_len_max", s.path_len_max},
      {"n_samples", s.n_samples},
      {"n_warmup", s.n_warmup},
      {"thin", s.thin},
      {"rwm_scale", s.rwm_scale},
      {"adapt_stepsize", s.adapt_stepsize},
      {"adapt_mass", s.adapt_mass},
      {"target_stat", s.target_stat ? Json(*s.target_stat) : Json(nullptr)},
      {"mass", cfg.mass_diag.empty() ? Json(nullptr) : Json(cfg.mass_diag)},
      {"disc_coords", cfg.disc_coords ? Json(*cfg.disc_coords) : Json(nullptr)},
  };
  Json model = {{"name", cfg.model.name},
                {"params", cfg.model.params},
                {"data", cfg.model.data ? Json(cfg.model.data->string()) : Json(nullptr)},
                {"synth_seed", cfg.model.synth_seed}};
  return Json{{"model", model},
              {"sampler", sampler},
              {"seed", s.seed},
              {"chains", cfg.chains},
              {"format", cfg.format == Format::csv ? "csv" : "jsonl"},
              {"init", cfg.init ? Json(*cfg.init) : Json(nullptr)},
              {"diagnostics", {{"columns", cfg.ess_columns}, {"batches", cfg.batches}}}};
}

std::vector<std::string> model_names() {
  return {"gaussian", "discrete_pmf", "step", "mixed_toy", "banana", "binomial_n",
          "ar1",      "jolly_seber",  "gen_bayes", "arch_cp"};
}

BuiltModel build_model(const ModelSpec& spec) {
  Section p(spec.params, "model.params");
  BuiltModel out;
  out.truth = nullptr;
  Rng synth_rng(spec.synth_seed);
  const std::string& name = spec.name;

  if (name == "gaussian") {
    const auto d = static_cast<std::size_t>(p.integer("dim", 1, 1));
    out.model = std::make_shared<models::GaussianTarget>(repeat_or(p, "sd", d, 1.0));
  } else if (name == "discrete_pmf") {
    const auto pmf = p.numbers("pmf", {0.2, 0.5, 0.3});
    require_pmf(pmf, "model.params.pmf");
    out.model = std::make_shared<models::DiscretePmfTarget>(pmf, p.integer("first", 1, INT64_MIN));
  } else if (name == "step") {
    const auto d = static_cast<std::size_t>(p.integer("dim", 2, 1));
    out.model = std::make_shared<models::StepTarget>(d, p.number("height", 1.0), p.number("threshold", 0.0),
                                                     p.boolean("quadratic", true));
  } else if (name == "mixed_toy") {
    const auto pmf = p.numbers("pmf", {0.2, 0.5, 0.3});
    require_pmf(pmf, "model.params.pmf");
    out.model = std::make_shared<models::MixedToyTarget>(pmf, p.number("coupling", 1.0));
  } else if (name == "banana") {
    out.model = std::make_shared<models::BananaTarget>(p.positive("cell", 0.5), p.positive("half_width", 10.0));
  } else if (name == "binomial_n") {
    const auto y = p.integer("y", 5, 0);
    const double q = p.probability("q", 0.5);
    const auto n_max = p.integer("n_max", 50, 1);
    if (n_max < std::max<std::int64_t>(y, 1) + 1) throw ConfigError("model.params.n_max", "must exceed max(y, 1)");
    const std::string kind = p.string("embedding", "uniform");
    EmbeddingMap::Kind k;
    if (kind == "uniform") {
      k = EmbeddingMap::Kind::uniform;
    } else if (kind == "logarithmic") {
      k = EmbeddingMap::Kind::logarithmic;
    } else {
      throw ConfigError("model.params.embedding", "expected uniform or logarithmic");
    }
    out.model = std::make_shared<models::BinomialNTarget>(y, q, n_max, k);
  } else if (name == "ar1") {
    const double alpha = p.number("alpha", 0.9);
    if (!(std::abs(alpha) < 1.0)) throw ConfigError("model.params.alpha", "must satisfy |alpha| < 1");
    out.model = std::make_shared<models::Ar1Target>(static_cast<std::size_t>(p.integer("dim", 100, 1)), alpha);
  } else if (name == "jolly_seber") {
    const double sigma_b = p.positive("sigma_b", 500.0);
    const auto n_max = p.integer("n_max", 5000, 2);
    models::JollySeberData data;
    if (spec.data) {
      data = load_jolly_seber(*spec.data);
    } else {
      const auto T = static_cast<std::size_t>(p.integer("occasions", 13, 2));
      const auto n0 = p.integer("initial_population", 500, 1);
      const auto pv = repeat_or(p, "p", T, 0.3);
      const auto phi = repeat_or(p, "phi", T - 1, 0.8);
      const auto births_d = repeat_or(p, "births", T - 1, 100.0);
      for (double v : pv) {
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("model.params.p", "entries must lie in (0, 1)");
      }
      for (double v : phi) {
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("model.params.phi", "entries must lie in (0, 1)");
      }
      std::vector<std::int64_t> births;
      for (double v : births_d) {
        if (v < 0.0 || v != std::floor(v)) throw ConfigError("model.params.births", "entries must be counts");
        births.push_back(static_cast<std::int64_t>(v));
      }
      auto sim = models::synth_jolly_seber(synth_rng, n0, pv, phi, births);
      data = sim.data;
      out.save_data = [d = sim.data](const fs::path& f) { save_jolly_seber(f, d); };
      out.truth = {{"U", sim.U}, {"N", sim.N}, {"p", sim.p}, {"phi", sim.phi}, {"births", sim.births}};
    }
    for (std::size_t i = 0; i < data.occasions(); ++i) {
      if (data.u[i] >= n_max) throw ConfigError("model.params.n_max", "must exceed every u_i");
    }
    out.model = std::make_shared<models::JollySeberTarget>(std::move(data), sigma_b, n_max);
  } else if (name == "gen_bayes") {
    models::ClassificationData data;
    if (spec.data) {
      data = load_classification(*spec.data);
    } else {
      const auto n = static_cast<std::size_t>(p.integer("n", 300, 1));
      const auto k = static_cast<std::size_t>(p.integer("k", 40, 1));
      auto sim = models::synth_classification(synth_rng, n, k);
      data = sim.data;
      out.save_data = [d = sim.data](const fs::path& f) { save_classification(f, d); };
      out.truth = {{"beta", sim.beta_true}};
    }
    out.model = std::make_shared<models::GenBayesTarget>(std::move(data));
  } else if (name == "arch_cp") {
    const auto k_max = static_cast<std::size_t>(p.integer("k_max", 10, 1));
    std::vector<double> y;
    if (spec.data) {
      y = load_series(*spec.data);
    } else {
      const auto T = static_cast<std::size_t>(p.integer("length", 500, 4));
      const auto cps = p.integers("change_points", {200, 350});
      const auto a = p.numbers("a", {0.5, 2.0, 0.8});
      const auto b = p.numbers("b", {0.3, 0.1, 0.5});
      try {
        auto sim = models::synth_arch(synth_rng, T, cps, a, b);
        y = sim.y;
        out.save_data = [v = sim.y](const fs::path& f) { save_series(f, v); };
        out.truth = {{"change_points", sim.change_points}, {"a", sim.a}, {"b", sim.b}};
      } catch (const ContractError& e) {
        throw ConfigError("model.params", e.what());
      }
    }
    if (y.size() < k_max + 3) throw ConfigError("model.params.k_max", "series too short for k_max change points");
    out.model = std::make_shared<models::ArchChangePointTarget>(std::move(y), k_max);
  }
  p.reject_unknown();
  if (spec.data && out.model && name != "jolly_seber" && name != "gen_bayes" && name != "arch_cp") {
    throw ConfigError("model.data", name + " takes no dataset");
  }
  return out;
}

}  // namespace dhmc::app

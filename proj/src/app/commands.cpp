#include "dhmc/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "dhmc/app/io.hpp"
#include "dhmc/errors.hpp"
#include "dhmc/integrators.hpp"
#include "dhmc/models/arch_cp.hpp"
#include "dhmc/models/jolly_seber.hpp"
#include "dhmc/rng.hpp"

namespace dhmc::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

const char* kind_name(SampleStore::ColumnKind k) {
  switch (k) {
    case SampleStore::ColumnKind::value: return "value";
    case SampleStore::ColumnKind::embedded: return "embedded";
    case SampleStore::ColumnKind::derived: return "derived";
  }
  return "value";
}

SampleStore::ColumnKind parse_kind(const std::string& s) {
  if (s == "embedded") return SampleStore::ColumnKind::embedded;
  if (s == "derived") return SampleStore::ColumnKind::derived;
  if (s == "value") return SampleStore::ColumnKind::value;
  throw DataError("unknown column kind '" + s + "'");
}

std::string hex64(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

std::string json_string(const std::string& s) { return Json(s).dump(); }

std::size_t worker_cap(const RunOverrides& o) {
  if (o.max_workers) return std::max<std::size_t>(1, *o.max_workers);
  if (const char* env = std::getenv("DHMC_MAX_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("DHMC_MAX_WORKERS", "expected a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

ResolvedRun resolve_run(const RunConfig& cfg, const TargetModel& model) {
  ResolvedRun r{cfg.sampler, cfg.init ? *cfg.init : model.initial_point()};
  const std::size_t d = model.dim();
  if (r.init.size() != d) throw ConfigError("init", "expected " + std::to_string(d) + " entries");
  if (!cfg.mass_diag.empty()) {
    if (cfg.mass_diag.size() != 1 && cfg.mass_diag.size() != d) {
      throw ConfigError("sampler.mass", "expected 1 or " + std::to_string(d) + " entries");
    }
    MassSpec m;
    m.diag = cfg.mass_diag.size() == 1 ? std::vector<double>(d, cfg.mass_diag[0]) : cfg.mass_diag;
    r.sampler.mass = m;
  }
  if (cfg.disc_coords) {
    for (auto k : *cfg.disc_coords) {
      if (k >= d) throw ConfigError("sampler.disc_coords", "index " + std::to_string(k) + " out of range");
    }
    auto disc = *cfg.disc_coords;
    std::sort(disc.begin(), disc.end());
    disc.erase(std::unique(disc.begin(), disc.end()), disc.end());
    r.sampler.partition = Partition::from_disc(d, disc);
  }
  try {
    (void)kernel_partition(model, r.sampler);
  } catch (const ContractError& e) {
    throw ConfigError("sampler.kernel", e.what());
  }
  if (std::isinf(checked_potential(model, r.init))) throw ConfigError("init", "initial point is outside the support");
  return r;
}

namespace {

BuiltModel build_checked(const ModelSpec& spec) {
  try {
    return build_model(spec);
  } catch (const ContractError& e) {
    throw ConfigError("model.params", e.what());
  }
}

// Adds the model-specific columns that need the whole chain.
void postprocess(SampleStore& store, const TargetModel& model, std::uint64_t chain_seed) {
  if (const auto* js = dynamic_cast<const models::JollySeberTarget*>(&model)) {
    add_population_sizes(store, *js, derive_seed(chain_seed, 1));
  } else if (const auto* arch = dynamic_cast<const models::ArchChangePointTarget*>(&model)) {
    if (store.rows() > 0) add_function_norms(store, *arch);
  }
}

void write_samples(const fs::path& dir, Format fmt, const std::vector<ChainResult>& res) {
  const auto& names = res.front().samples.names();
  if (fmt == Format::csv) {
    std::ofstream out(dir / "samples.csv");
    if (!out) throw DataError("cannot write " + (dir / "samples.csv").string());
    out << "chain,iter";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t c = 0; c < res.size(); ++c) {
      const auto& s = res[c].samples;
      for (std::size_t r = 0; r < s.rows(); ++r) {
        out << c << ',' << r;
        for (std::size_t k = 0; k < s.cols(); ++k) out << ',' << format_double(s.column(k)[r]);
        out << '\n';
      }
    }
  } else {
    std::ofstream out(dir / "samples.jsonl");
    if (!out) throw DataError("cannot write " + (dir / "samples.jsonl").string());
    std::vector<std::string> keys;
    for (const auto& n : names) keys.push_back(json_string(n));
    for (std::size_t c = 0; c < res.size(); ++c) {
      const auto& s = res[c].samples;
      for (std::size_t r = 0; r < s.rows(); ++r) {
        out << "{\"chain\":" << c << ",\"iter\":" << r;
        for (std::size_t k = 0; k < s.cols(); ++k) out << ',' << keys[k] << ':' << json_number(s.column(k)[r]);
        out << "}\n";
      }
    }
  }
}

const std::vector<std::string> kTraceColumns = {"chain",         "iter",           "accepted",      "delta_H",
                                                "accept_prob",   "flips",          "coord_updates", "potential_evals",
                                                "gradient_evals", "eps",           "path_len",      "divergent"};

void write_trace(const fs::path& dir, Format fmt, const std::vector<ChainResult>& res) {
  const fs::path path = dir / (fmt == Format::csv ? "trace.csv" : "trace.jsonl");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (fmt == Format::csv) {
    for (std::size_t k = 0; k < kTraceColumns.size(); ++k) out << (k ? "," : "") << kTraceColumns[k];
    out << '\n';
  }
  for (std::size_t c = 0; c < res.size(); ++c) {
    for (std::size_t i = 0; i < res[c].trace.size(); ++i) {
      const auto& t = res[c].trace[i];
      const std::vector<std::string> v = {std::to_string(c),
                                          std::to_string(i),
                                          t.accepted ? "1" : "0",
                                          fmt == Format::csv ? format_double(t.delta_H) : json_number(t.delta_H),
                                          fmt == Format::csv ? format_double(t.accept_prob) : json_number(t.accept_prob),
                                          std::to_string(t.flips),
                                          std::to_string(t.coord_updates),
                                          std::to_string(t.potential_evals),
                                          std::to_string(t.gradient_evals),
                                          format_double(t.eps_used),
                                          std::to_string(t.path_len),
                                          t.divergent ? "1" : "0"};
      if (fmt == Format::csv) {
        for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << v[k];
      } else {
        out << '{';
        for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << '"' << kTraceColumns[k] << "\":" << v[k];
        out << '}';
      }
      out << '\n';
    }
  }
}

Json chain_report(const ChainResult& r, std::size_t chain, std::uint64_t seed) {
  std::size_t accepted = 0, flips = 0, updates = 0;
  double path = 0.0;
  for (const auto& t : r.trace) {
    accepted += t.accepted;
    flips += t.flips;
    updates += t.coord_updates;
    path += t.path_len;
  }
  const double n = r.trace.empty() ? 1.0 : static_cast<double>(r.trace.size());
  const auto& tu = r.tuning;
  return Json{{"chain", chain},
              {"seed", seed},
              {"draws", r.samples.rows()},
              {"iterations", r.trace.size()},
              {"acceptance_rate", accepted / n},
              {"flip_rate", updates ? static_cast<double>(flips) / static_cast<double>(updates) : 0.0},
              {"mean_path_len", path / n},
              {"divergences", r.divergences},
              {"potential_evals", r.potential_evals},
              {"gradient_evals", r.gradient_evals},
              {"total_evals", r.total_evals()},
              {"tuning",
               {{"adapted_stepsize", tu.adapted_stepsize},
                {"adapted_mass", tu.adapted_mass},
                {"final_eps", tu.final_eps},
                {"final_rwm_scale", tu.final_rwm_scale},
                {"target_stat", tu.target_stat},
                {"late_warmup_stat", tu.late_warmup_stat},
                {"mass", tu.mass.diag},
                {"constant_coords", tu.constant_coords}}}};
}

std::string compiler_version() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

Json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("missing artifact " + path.string());
  try {
    return Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Rows grouped by the leading `chain` column.
std::vector<CsvTable> split_chains(const CsvTable& t, std::size_t chains, const fs::path& path) {
  if (t.header.size() < 2 || t.header[0] != "chain" || t.header[1] != "iter") {
    throw DataError(path.string() + ": expected leading chain and iter columns");
  }
  std::vector<CsvTable> out(chains);
  for (auto& o : out) {
    o.header.assign(t.header.begin() + 2, t.header.end());
    o.columns.resize(o.header.size());
  }
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double c = t.columns[0][r];
    if (!(c >= 0.0) || c >= static_cast<double>(chains) || c != std::floor(c)) {
      throw DataError(path.string() + ": chain index out of range");
    }
    auto& o = out[static_cast<std::size_t>(c)];
    for (std::size_t k = 2; k < t.header.size(); ++k) o.columns[k - 2].push_back(t.columns[k][r]);
  }
  return out;
}

CsvTable read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing artifact " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::ordered_json rec;
    try {
      rec = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::ordered_json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (t.header.empty()) {
      for (const auto& [k, v] : rec.items()) t.header.push_back(k);
      t.columns.resize(t.header.size());
    }
    if (rec.size() != t.header.size()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": field count");
    std::size_t k = 0;
    for (const auto& [key, v] : rec.items()) {
      if (key != t.header[k]) throw DataError(path.string() + ":" + std::to_string(lineno) + ": field order");
      t.columns[k++].push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
  }
  return t;
}

CsvTable read_table(const fs::path& dir, const std::string& stem, Format fmt) {
  const fs::path path = dir / (stem + (fmt == Format::csv ? ".csv" : ".jsonl"));
  if (!fs::exists(path)) throw DataError("missing artifact " + path.string());
  return fmt == Format::csv ? read_csv(path) : read_jsonl(path);
}

Json ess_json(const EssReport& r) {
  Json params = Json::array();
  for (const auto& p : r.params) params.push_back({{"name", p.name}, {"ess_mean", p.ess_mean}, {"ess_second", p.ess_second}});
  return Json{{"n", r.n},
              {"batches", r.batch_count},
              {"min_ess", r.min_ess},
              {"min_param", r.min_param},
              {"ess_per_100", r.n ? 100.0 * r.min_ess / static_cast<double>(r.n) : 0.0},
              {"total_evals", r.total_evals},
              {"ess_per_eval", r.ess_per_eval},
              {"params", params},
              {"excluded", r.excluded}};
}

Json interval_json(const EssInterval& i) {
  return Json{{"mean", i.mean}, {"sd", i.sd}, {"lo", i.lo}, {"hi", i.hi}};
}

std::vector<EssReport> ess_reports(const RunArtifacts& run) {
  std::vector<EssReport> out;
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    const auto& store = run.chains[c];
    const auto sel = run.config.ess_columns.empty() ? default_selector(store) : run.config.ess_columns;
    for (const auto& name : sel) {
      if (!store.find(name)) throw ConfigError("diagnostics.columns", "no column named '" + name + "'");
    }
    if (store.rows() < 2 * run.config.batches) {
      throw DataError("chain " + std::to_string(c) + " has " + std::to_string(store.rows()) + " draws; ESS needs at least " +
                      std::to_string(2 * run.config.batches));
    }
    out.push_back(min_ess_report(store, sel, run.total_evals[c], run.config.batches));
  }
  return out;
}

std::string model_identity(const RunConfig& cfg) { return hex64(fnv1a64(to_json(cfg).at("model").dump())); }

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const Json::exception*>(&e) ||
      dynamic_cast<const UnsupportedTarget*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const OutOfSupport*>(&e)) return kExitData;
  return kExitNumeric;
}

fs::path cmd_run(const RunConfig& cfg_in, const RunOverrides& o) {
  RunConfig cfg = cfg_in;
  if (o.out) cfg.output_dir = *o.out;
  if (o.chains) {
    if (*o.chains < 1) throw ConfigError("--chains", "must be at least 1");
    cfg.chains = *o.chains;
  }
  if (o.seed) cfg.sampler.seed = *o.seed;
  if (o.format) cfg.format = *o.format;

  const BuiltModel built = build_checked(cfg.model);
  const TargetModel& model = *built.model;
  const ResolvedRun rs = resolve_run(cfg, model);
  const std::size_t workers = std::min(worker_cap(o), cfg.chains);

  std::vector<ChainResult> results(cfg.chains);
  std::vector<std::uint64_t> seeds(cfg.chains);
  for (std::size_t c = 0; c < cfg.chains; ++c) seeds[c] = derive_seed(cfg.sampler.seed, c);
  std::vector<std::exception_ptr> errors(cfg.chains);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cfg.chains; c = next++) {
      try {
        SamplerConfig sc = rs.sampler;
        sc.seed = seeds[c];
        results[c] = run_chain(model, rs.init, sc);
        postprocess(results[c].samples, model, seeds[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  const Json canonical = to_json(cfg);
  const std::string canonical_text = canonical.dump(2);
  write_text(dir / "config.json", canonical_text + "\n");
  write_samples(dir, cfg.format, results);
  write_trace(dir, cfg.format, results);

  Json columns = Json::array();
  const auto& store = results.front().samples;
  for (std::size_t k = 0; k < store.cols(); ++k) columns.push_back({{"name", store.names()[k]}, {"kind", kind_name(store.kind(k))}});
  Json chains = Json::array();
  std::size_t divergences = 0;
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    chains.push_back(chain_report(results[c], c, seeds[c]));
    divergences += results[c].divergences;
  }
  const Json report = {{"model", model.name()},
                       {"kernel", to_string(cfg.sampler.kernel)},
                       {"dim", model.dim()},
                       {"divergences", divergences},
                       {"columns", columns},
                       {"chains", chains}};
  write_text(dir / "report.json", report.dump(2) + "\n");

  const std::string ext = cfg.format == Format::csv ? ".csv" : ".jsonl";
  Json artifacts = {"config.json", "samples" + ext, "trace" + ext, "report.json", "manifest.json"};
  if (!built.truth.is_null()) {
    write_text(dir / "truth.json", built.truth.dump(2) + "\n");
    artifacts.push_back("truth.json");
  }
  const Json manifest = {{"seed", cfg.sampler.seed},
                         {"chain_seeds", seeds},
                         {"chains", cfg.chains},
                         {"model", model.name()},
                         {"model_hash", model_identity(cfg)},
                         {"kernel", to_string(cfg.sampler.kernel)},
                         {"format", cfg.format == Format::csv ? "csv" : "jsonl"},
                         {"config_hash", hex64(fnv1a64(canonical_text))},
                         {"artifacts", artifacts},
                         {"versions",
                          {{"dhmc", kVersion},
                           {"compiler", compiler_version()},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

fs::path cmd_run(const fs::path& config_path, const RunOverrides& o) { return cmd_run(load_run_config(config_path), o); }

RunArtifacts load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a run directory: " + dir.string());
  RunArtifacts run;
  run.manifest = read_json(dir / "manifest.json");
  const Json report = read_json(dir / "report.json");
  try {
    run.config = parse_run_config(read_json(dir / "config.json"), dir);
  } catch (const ConfigError& e) {
    throw DataError((dir / "config.json").string() + ": " + e.what());
  }
  const Format fmt = run.config.format;
  const std::size_t chains = run.config.chains;

  std::vector<SampleStore::ColumnKind> kinds;
  std::vector<std::string> names;
  try {
    for (const auto& c : report.at("columns")) {
      names.push_back(c.at("name").get<std::string>());
      kinds.push_back(parse_kind(c.at("kind").get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw DataError((dir / "report.json").string() + ": " + e.what());
  }

  const CsvTable samples = read_table(dir, "samples", fmt);
  const fs::path samples_path = dir / (fmt == Format::csv ? "samples.csv" : "samples.jsonl");
  CsvTable framed = samples;
  if (framed.header.empty()) {
    // An empty JSONL file carries no header; fall back to the report layout.
    framed.header = {"chain", "iter"};
    framed.header.insert(framed.header.end(), names.begin(), names.end());
    framed.columns.assign(framed.header.size(), {});
  }
  auto per_chain = split_chains(framed, chains, samples_path);
  for (auto& t : per_chain) {
    if (t.header != names) throw DataError(samples_path.string() + ": columns disagree with report.json");
    SampleStore s;
    for (std::size_t k = 0; k < names.size(); ++k) s.add_column(names[k], kinds[k], std::move(t.columns[k]));
    run.chains.push_back(std::move(s));
  }

  const CsvTable trace = read_table(dir, "trace", fmt);
  run.total_evals.assign(chains, 0);
  run.iterations.assign(chains, 0);
  run.mean_path_len.assign(chains, 0.0);
  if (trace.rows() > 0) {
    const auto& ch = trace.columns[trace.index("chain")];
    const auto& pe = trace.columns[trace.index("potential_evals")];
    const auto& ge = trace.columns[trace.index("gradient_evals")];
    const auto& pl = trace.columns[trace.index("path_len")];
    for (std::size_t r = 0; r < trace.rows(); ++r) {
      const auto c = static_cast<std::size_t>(ch[r]);
      if (c >= chains) throw DataError("trace chain index out of range");
      run.total_evals[c] += static_cast<std::size_t>(pe[r] + ge[r]);
      run.iterations[c] += 1;
      run.mean_path_len[c] += pl[r];
    }
  }
  for (std::size_t c = 0; c < chains; ++c) {
    if (run.iterations[c]) run.mean_path_len[c] /= static_cast<double>(run.iterations[c]);
  }
  return run;
}

Json cmd_diagnose(const fs::path& dir) {
  const RunArtifacts run = load_run(dir);
  const auto reports = ess_reports(run);
  Json out = {{"model", run.manifest.value("model", "")}, {"kernel", run.manifest.value("kernel", "")}};
  Json chains = Json::array();
  for (std::size_t c = 0; c < reports.size(); ++c) {
    Json r = ess_json(reports[c]);
    r["chain"] = c;
    chains.push_back(r);
  }
  out["chains"] = chains;
  if (reports.size() >= 2) {
    const EssSummary s = summarize(reports);
    Json params = Json::array();
    for (std::size_t k = 0; k < s.names.size(); ++k) {
      params.push_back({{"name", s.names[k]},
                        {"ess_mean", interval_json(s.mean_moment[k])},
                        {"ess_second", interval_json(s.second_moment[k])}});
    }
    out["summary"] = {{"chains", s.chains},
                      {"min_ess", interval_json(s.min_ess)},
                      {"min_param", s.min_param},
                      {"ess_per_eval", interval_json(s.ess_per_eval)},
                      {"params", params}};
  }
  write_text(dir / "ess.json", out.dump(2) + "\n");
  return out;
}

std::vector<CompareRow> compare_runs(const std::vector<fs::path>& dirs) {
  if (dirs.size() < 2) throw ConfigError("runs", "compare needs at least two run directories");
  std::vector<CompareRow> rows;
  std::string identity, first_dir;
  for (const auto& dir : dirs) {
    const RunArtifacts run = load_run(dir);
    const std::string id = model_identity(run.config);
    if (identity.empty()) {
      identity = id;
      first_dir = dir.string();
    } else if (id != identity) {
      throw ConfigError("runs", dir.string() + " targets a different model than " + first_dir);
    }
    const auto reports = ess_reports(run);
    CompareRow row;
    const std::string stem = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    row.label = stem;
    row.kernel = to_string(run.config.sampler.kernel);
    row.chains = reports.size();
    std::size_t evals = 0, iters = 0;
    for (std::size_t c = 0; c < reports.size(); ++c) {
      row.min_ess += reports[c].min_ess;
      row.ess_per_100 += 100.0 * reports[c].min_ess / static_cast<double>(reports[c].n);
      row.ess_per_1e6_evals += 1e6 * reports[c].ess_per_eval;
      row.mean_path_len += run.mean_path_len[c];
      evals += run.total_evals[c];
      iters += run.iterations[c];
    }
    const double k = static_cast<double>(reports.size());
    row.min_ess /= k;
    row.ess_per_100 /= k;
    row.ess_per_1e6_evals /= k;
    row.mean_path_len /= k;
    row.evals_per_iter = iters ? static_cast<double>(evals) / static_cast<double>(iters) : 0.0;
    rows.push_back(row);
  }
  double cheapest = INFINITY;
  for (const auto& r : rows) {
    if (r.evals_per_iter > 0.0) cheapest = std::min(cheapest, r.evals_per_iter);
  }
  for (auto& r : rows) r.relative_cost = std::isfinite(cheapest) ? r.evals_per_iter / cheapest : 0.0;
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) { return a.min_ess > b.min_ess; });
  return rows;
}

std::vector<CompareRow> cmd_compare(const std::vector<fs::path>& dirs, const fs::path& out_dir, std::ostream& table) {
  const auto rows = compare_runs(dirs);
  const std::vector<std::string> header = {"run",         "kernel",           "chains",        "min_ess",
                                           "ess_per_100", "ess_per_1e6_evals", "mean_path_len", "evals_per_iter",
                                           "relative_cost"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.label, r.kernel, std::to_string(r.chains), format_double(r.min_ess), format_double(r.ess_per_100),
                     format_double(r.ess_per_1e6_evals), format_double(r.mean_path_len), format_double(r.evals_per_iter),
                     format_double(r.relative_cost)});
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream csv(out_dir / "compare.csv");
  if (!csv) throw DataError("cannot write " + (out_dir / "compare.csv").string());
  for (std::size_t k = 0; k < header.size(); ++k) csv << (k ? "," : "") << header[k];
  csv << '\n';
  for (const auto& row : cells) {
    for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << row[k];
    csv << '\n';
  }

  // Aligned text uses fixed precision; the CSV keeps full precision.
  std::vector<std::vector<std::string>> shown = {header};
  for (const auto& r : rows) {
    auto fixed = [](double v, int prec) {
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(prec) << v;
      return ss.str();
    };
    shown.push_back({r.label, r.kernel, std::to_string(r.chains), fixed(r.min_ess, 1), fixed(r.ess_per_100, 2),
                     fixed(r.ess_per_1e6_evals, 2), fixed(r.mean_path_len, 2), fixed(r.evals_per_iter, 1),
                     fixed(r.relative_cost, 2)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : shown) {
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  }
  for (const auto& row : shown) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) table << "  ";
      if (k < 2) {
        table << std::left << std::setw(static_cast<int>(width[k])) << row[k];
      } else {
        table << std::right << std::setw(static_cast<int>(width[k])) << row[k];
      }
    }
    table << '\n';
  }
  return rows;
}

fs::path dump_trajectory(const RunConfig& cfg, const fs::path& out_file) {
  const BuiltModel built = build_checked(cfg.model);
  const TargetModel& model = *built.model;
  const ResolvedRun rs = resolve_run(cfg, model);
  const Partition part = kernel_partition(model, rs.sampler);
  const MassSpec mass = rs.sampler.mass.value_or(MassSpec::identity(model.dim()));
  mass.validate(part);

  Rng rng(cfg.sampler.seed);
  PhaseState state{rs.init, sample_momentum(rng, mass, part), part};
  const double eps = rs.sampler.eps_max;
  const int steps = rs.sampler.path_len_max;
  auto ws = model.make_workspace();
  SmoothCache cache;

  std::ofstream out(out_file);
  if (!out) throw DataError("cannot write " + out_file.string());
  out << "step,axis,flip,H";
  for (const auto& n : model.parameter_names()) out << ',' << n;
  out << '\n';
  auto row = [&](int step, long axis, std::size_t flips) {
    out << step << ',' << axis << ',' << flips << ','
        << format_double(hamiltonian(model, state, mass).hamiltonian);
    for (double x : state.theta) out << ',' << format_double(x);
    out << '\n';
  };
  row(0, -1, 0);
  const SweepOrder order = SweepOrder::random(part, rng);
  for (int s = 1; s <= steps; ++s) {
    if (part.smooth.empty()) {
      for (std::size_t j : order.perm) {
        const StepOutcome o = coord_step(model, state, j, eps, mass, ws.get());
        row(s, static_cast<long>(j), o.flips);
      }
    } else {
      const StepOutcome o = dhmc_step(model, state, order, eps, mass, cache, ws.get());
      row(s, -1, o.flips);
      if (o.divergent) break;
    }
  }
  return out_file;
}

fs::path cmd_plotdata(const fs::path& dir, const std::string& kind, const fs::path& out_dir, const PlotOptions& opts) {
  if (kind != "trajectory" && kind != "marginal2d" && kind != "funcdraws") {
    throw ConfigError("kind", "unknown plot kind '" + kind + "' (trajectory, marginal2d, funcdraws)");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (kind == "trajectory") {
    const fs::path cfg_path = dir / "config.json";
    if (!fs::exists(cfg_path)) throw DataError("missing artifact " + cfg_path.string());
    return dump_trajectory(load_run_config(cfg_path), out_dir / "trajectory.csv");
  }

  const RunArtifacts run = load_run(dir);
  if (kind == "marginal2d") {
    const auto& first = run.chains.front();
    const auto sel = default_selector(first);
    const std::string xn = opts.x.empty() ? (sel.size() > 0 ? sel[0] : "") : opts.x;
    const std::string yn = opts.y.empty() ? (sel.size() > 1 ? sel[1] : "") : opts.y;
    if (!first.find(xn)) throw ConfigError("--x", "no column named '" + xn + "'");
    if (!first.find(yn)) throw ConfigError("--y", "no column named '" + yn + "'");
    if (opts.bins < 1) throw ConfigError("--bins", "must be at least 1");
    std::vector<double> xs, ys;
    for (const auto& s : run.chains) {
      const auto& cx = s.column(xn);
      const auto& cy = s.column(yn);
      xs.insert(xs.end(), cx.begin(), cx.end());
      ys.insert(ys.end(), cy.begin(), cy.end());
    }
    const fs::path file = out_dir / "marginal2d.csv";
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "x_lo,x_hi,y_lo,y_hi,count,density\n";
    if (xs.empty()) return file;
    auto range = [](const std::vector<double>& v) {
      auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      double a = *lo, b = *hi;
      if (a == b) {
        a -= 0.5;
        b += 0.5;
      }
      return std::pair{a, b};
    };
    const auto [x0, x1] = range(xs);
    const auto [y0, y1] = range(ys);
    const std::size_t B = opts.bins;
    const double wx = (x1 - x0) / static_cast<double>(B), wy = (y1 - y0) / static_cast<double>(B);
    std::vector<std::size_t> counts(B * B, 0);
    auto bin = [B](double v, double lo, double w) {
      const auto k = static_cast<std::size_t>(std::max(0.0, std::floor((v - lo) / w)));
      return std::min(k, B - 1);
    };
    for (std::size_t i = 0; i < xs.size(); ++i) ++counts[bin(xs[i], x0, wx) * B + bin(ys[i], y0, wy)];
    const double norm = static_cast<double>(xs.size()) * wx * wy;
    for (std::size_t a = 0; a < B; ++a) {
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t n = counts[a * B + b];
        out << format_double(x0 + wx * static_cast<double>(a)) << ',' << format_double(x0 + wx * static_cast<double>(a + 1))
            << ',' << format_double(y0 + wy * static_cast<double>(b)) << ','
            << format_double(y0 + wy * static_cast<double>(b + 1)) << ',' << n << ','
            << format_double(static_cast<double>(n) / norm) << '\n';
      }
    }
    return file;
  }

  // funcdraws
  const BuiltModel built = build_checked(run.config.model);
  const auto* arch = dynamic_cast<const models::ArchChangePointTarget*>(built.model.get());
  if (!arch) throw ConfigError("kind", "funcdraws needs an arch_cp run, got " + built.model->name());
  const fs::path file = out_dir / "funcdraws.csv";
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << "draw,chain,iter,t,a,b\n";
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    for (std::size_t r = 0; r < run.chains[c].rows(); ++r) rows.emplace_back(c, r);
  }
  if (rows.empty() || opts.draws == 0) return file;
  const std::size_t m = std::min(opts.draws, rows.size());
  std::vector<double> a_t, b_t;
  for (std::size_t k = 0; k < m; ++k) {
    const auto [c, r] = rows[k * rows.size() / m];
    const auto theta = theta_at(run.chains[c], *arch, r);
    arch->volatility_functions(theta, a_t, b_t);
    for (std::size_t t = 0; t < a_t.size(); ++t) {
      out << k << ',' << c << ',' << r << ',' << t + 1 << ',' << format_double(a_t[t]) << ',' << format_double(b_t[t])
          << '\n';
    }
  }
  return file;
}

void cmd_synth(const RunConfig& cfg, const fs::path& out_file) {
  if (cfg.model.data) throw ConfigError("model.data", "synth simulates data; remove the data path");
  const BuiltModel built = build_checked(cfg.model);
  if (!built.save_data) throw ConfigError("model.name", cfg.model.name + " has no simulated dataset");
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  built.save_data(out_file);
  fs::path truth = out_file;
  truth.replace_extension(".truth.json");
  write_text(truth, built.truth.dump(2) + "\n");
}

}  // namespace dhmc::app

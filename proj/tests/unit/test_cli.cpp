#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "dhmc/app/commands.hpp"
#include "dhmc/app/config.hpp"
#include "dhmc/app/io.hpp"
#include "dhmc/errors.hpp"

using namespace dhmc;
using namespace dhmc::app;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("dhmc_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

RunConfig gaussian_run(std::size_t chains, std::size_t n, const std::string& kernel = "dhmc") {
  return parse_run_config(Json{{"model", {{"name", "gaussian"}, {"params", {{"dim", 2}}}}},
                               {"seed", 11},
                               {"chains", chains},
                               {"sampler", {{"kernel", kernel}, {"eps", 0.4}, {"path_len", 8}, {"n_samples", n}}}});
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("run writes every artifact with one row per draw") {
    const auto dir = fresh_dir("artifacts");
    RunOverrides o;
    o.out = dir;
    cmd_run(gaussian_run(2, 100), o);
    for (const char* f : {"config.json", "samples.csv", "trace.csv", "report.json", "manifest.json"}) {
      CHECK(fs::exists(dir / f));
    }
    CHECK_FALSE(fs::exists(dir / "truth.json"));
    CHECK(line_count(dir / "samples.csv") == 201);
    const auto samples = read_csv(dir / "samples.csv");
    CHECK(samples.header[0] == "chain");
    CHECK(samples.header[1] == "iter");
    const auto manifest = Json::parse(read_text(dir / "manifest.json"));
    CHECK(manifest.at("chain_seeds").size() == 2);
    CHECK(manifest.at("kernel") == "dhmc");
    const auto run = load_run(dir);
    CHECK(run.chains.size() == 2);
    CHECK(run.chains[0].rows() == 100);
  }

  TEST_CASE("reruns and worker counts produce byte-identical artifacts") {
    const auto a = fresh_dir("serial"), b = fresh_dir("parallel"), c = fresh_dir("again");
    RunOverrides o;
    o.out = a;
    o.max_workers = 1;
    cmd_run(gaussian_run(4, 150), o);
    o.out = b;
    o.max_workers = 4;
    cmd_run(gaussian_run(4, 150), o);
    o.out = c;
    cmd_run(gaussian_run(4, 150), o);
    for (const char* f : {"config.json", "samples.csv", "trace.csv", "report.json", "manifest.json"}) {
      CHECK(read_text(a / f) == read_text(b / f));
      CHECK(read_text(a / f) == read_text(c / f));
    }
  }

  TEST_CASE("jsonl output carries the same draws") {
    const auto a = fresh_dir("csvfmt"), b = fresh_dir("jsonlfmt");
    RunOverrides o;
    o.out = a;
    cmd_run(gaussian_run(1, 50), o);
    o.out = b;
    o.format = Format::jsonl;
    cmd_run(gaussian_run(1, 50), o);
    CHECK(line_count(b / "samples.jsonl") == 50);
    const auto ra = load_run(a), rb = load_run(b);
    CHECK(ra.chains[0].column("theta0") == rb.chains[0].column("theta0"));
  }

  TEST_CASE("exceptions map to exit codes") {
    CHECK(exit_code(ConfigError("f", "bad")) == kExitConfig);
    CHECK(exit_code(UnsupportedTarget("no")) == kExitConfig);
    CHECK(exit_code(DataError("missing")) == kExitData);
    CHECK(exit_code(OutOfSupport("outside")) == kExitData);
    CHECK(exit_code(ModelError("nan")) == kExitNumeric);
    CHECK(exit_code(UndefinedStatistic("zero")) == kExitNumeric);
    CHECK(exit_code(ContractError("bug")) == kExitNumeric);
    CHECK(exit_code(std::runtime_error("other")) == kExitNumeric);
    try {
      [[maybe_unused]] const auto j = Json::parse("{not json");
      FAIL("parse should throw");
    } catch (const std::exception& e) {
      CHECK(exit_code(e) == kExitConfig);
    }
  }

  TEST_CASE("configuration is strict and names the offending field") {
    const Json base = {{"model", "gaussian"}, {"sampler", {{"kernel", "dhmc"}}}};
    CHECK_NOTHROW(parse_run_config(base));
    Json unknown = base;
    unknown["samplr"] = 1;
    CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
    Json inverted = base;
    inverted["sampler"]["eps_min"] = 0.5;
    inverted["sampler"]["eps_max"] = 0.1;
    try {
      parse_run_config(inverted);
      FAIL("inverted stepsize range accepted");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("eps_min") != std::string::npos);
    }
    Json kernel = base;
    kernel["sampler"]["kernel"] = "nuts";
    CHECK_THROWS_AS(parse_run_config(kernel), ConfigError);
    Json model = base;
    model["model"] = "unknown_model";
    CHECK_THROWS_AS(cmd_run(parse_run_config(model)), ConfigError);
    CHECK_THROWS_AS(load_run_config(fresh_dir("noconfig") / "missing.json"), ConfigError);
    // The canonical form parses back to itself.
    const auto cfg = gaussian_run(3, 20);
    CHECK(to_json(parse_run_config(to_json(cfg))) == to_json(cfg));
  }

  TEST_CASE("loading an empty directory is a data error") {
    CHECK_THROWS_AS(load_run(fresh_dir("empty")), DataError);
    CHECK(exit_code(DataError("x")) == 3);
  }

  TEST_CASE("diagnose adds a cross-chain summary only with several chains") {
    const auto one = fresh_dir("diag1"), eight = fresh_dir("diag8");
    RunOverrides o;
    o.out = one;
    cmd_run(gaussian_run(1, 200), o);
    o.out = eight;
    cmd_run(gaussian_run(8, 200), o);
    const auto j1 = cmd_diagnose(one);
    CHECK(j1.at("chains").size() == 1);
    CHECK_FALSE(j1.contains("summary"));
    const auto j8 = cmd_diagnose(eight);
    CHECK(j8.at("chains").size() == 8);
    REQUIRE(j8.contains("summary"));
    const auto& s = j8.at("summary");
    CHECK(s.at("chains") == 8);
    const double mean = s.at("min_ess").at("mean"), lo = s.at("min_ess").at("lo"), hi = s.at("min_ess").at("hi");
    CHECK(lo <= mean);
    CHECK(mean <= hi);
    CHECK(fs::exists(eight / "ess.json"));
  }

  TEST_CASE("compare sorts by min ESS and refuses mixed models") {
    const auto a = fresh_dir("cmp_dhmc"), b = fresh_dir("cmp_rwm"), c = fresh_dir("cmp_other"), out = fresh_dir("cmp_out");
    RunOverrides o;
    o.out = a;
    cmd_run(gaussian_run(2, 500, "dhmc"), o);
    o.out = b;
    auto rwm = gaussian_run(2, 500, "rwm");
    cmd_run(rwm, o);
    std::ostringstream table;
    const auto rows = cmd_compare({b, a}, out, table);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].min_ess >= rows[1].min_ess);
    CHECK(rows[0].kernel != rows[1].kernel);
    CHECK(fs::exists(out / "compare.csv"));
    CHECK(table.str().find("rwm") != std::string::npos);

    o.out = c;
    cmd_run(parse_run_config(Json{{"model", "discrete_pmf"}, {"sampler", {{"kernel", "dhmc"}, {"n_samples", 100}}}}), o);
    CHECK_THROWS_AS(compare_runs({a, c}), ConfigError);
    CHECK_THROWS_AS(compare_runs({a}), ConfigError);
  }

  TEST_CASE("banana trajectory moves one axis by a full step at a time") {
    const auto dir = fresh_dir("traj");
    const auto cfg = parse_run_config(Json{
        {"model", "banana"},
        {"seed", 3},
        {"sampler", {{"kernel", "dhmc"}, {"eps", 0.5}, {"path_len", 30}, {"n_samples", 5}, {"jitter", false}}}});
    const auto file = dump_trajectory(cfg, dir / "trajectory.csv");
    const auto t = read_csv(file);
    const auto &axis = t.columns[t.index("axis")], &flip = t.columns[t.index("flip")], &H = t.columns[t.index("H")];
    const auto &x = t.columns[t.index("theta0")], &y = t.columns[t.index("theta1")];
    REQUIRE(t.rows() > 10);
    std::size_t moves = 0;
    for (std::size_t r = 1; r < t.rows(); ++r) {
      const double dx = std::abs(x[r] - x[r - 1]), dy = std::abs(y[r] - y[r - 1]);
      CHECK(std::abs(H[r] - H[0]) <= 1e-9 * std::max(1.0, std::abs(H[0])));
      if (flip[r] == 1.0) {
        CHECK(dx + dy == 0.0);
        continue;
      }
      ++moves;
      if (axis[r] == 0.0) {
        CHECK(std::abs(dx - 0.5) < 1e-12);
        CHECK(dy == 0.0);
      } else {
        CHECK(std::abs(dy - 0.5) < 1e-12);
        CHECK(dx == 0.0);
      }
    }
    CHECK(moves > 0);
  }

  TEST_CASE("capture-recapture U1 and p1 are negatively correlated") {
    const auto dir = fresh_dir("js");
    RunOverrides o;
    o.out = dir;
    cmd_run(parse_run_config(Json{
                {"model", "jolly_seber"},
                {"seed", 5},
                {"sampler", {{"kernel", "dhmc"}, {"eps", 0.05}, {"path_len", 20}, {"n_samples", 400}, {"n_warmup", 200}}}}),
            o);
    CHECK(fs::exists(dir / "truth.json"));
    const auto run = load_run(dir);
    CHECK(correlation(run.chains[0].column("U1"), run.chains[0].column("p1")) < -0.3);
    PlotOptions p;
    p.x = "U1";
    p.y = "p1";
    p.bins = 6;
    const auto file = cmd_plotdata(dir, "marginal2d", dir, p);
    const auto m = read_csv(file);
    CHECK(m.rows() == 36);
    double total = 0.0;
    for (double v : m.columns[m.index("count")]) total += v;
    CHECK(total == 400.0);
    CHECK_THROWS_AS(cmd_plotdata(dir, "histogram", dir), ConfigError);
    CHECK_THROWS_AS(cmd_plotdata(dir, "funcdraws", dir), ConfigError);
  }

  TEST_CASE("marginal2d of an empty store writes only the header") {
    const auto dir = fresh_dir("emptyrun");
    RunOverrides o;
    o.out = dir;
    cmd_run(gaussian_run(1, 20), o);
    const std::string text = read_text(dir / "samples.csv");
    write_text(dir / "samples.csv", text.substr(0, text.find('\n') + 1));
    CHECK(load_run(dir).chains.at(0).rows() == 0);
    const auto file = cmd_plotdata(dir, "marginal2d", dir);
    CHECK(line_count(file) == 1);
  }

  TEST_CASE("synth writes a dataset and its planted values") {
    const auto dir = fresh_dir("synth");
    const auto cfg = parse_run_config(Json{{"model", {{"name", "arch_cp"}, {"synth_seed", 4}}}});
    cmd_synth(cfg, dir / "series.csv");
    CHECK(load_series(dir / "series.csv").size() == 500);
    const auto truth = Json::parse(read_text(dir / "series.truth.json"));
    CHECK(truth.contains("change_points"));
  }

  TEST_CASE("number formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(INFINITY) == "inf");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(NAN) == "nan");
    const auto dir = fresh_dir("csv");
    CsvTable t{{"a", "b"}, {{1.5, -2.0}, {1e-12, 3.0}}};
    write_csv(dir / "t.csv", t);
    const auto back = read_csv(dir / "t.csv");
    CHECK(back.header == t.header);
    CHECK(back.columns == t.columns);
    CHECK_THROWS_AS(back.index("c"), DataError);
  }
}

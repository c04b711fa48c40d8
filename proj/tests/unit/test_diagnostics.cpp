#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dhmc/diagnostics.hpp"
#include "dhmc/errors.hpp"
#include "dhmc/rng.hpp"

using namespace dhmc;

namespace {

std::vector<double> iid(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

std::vector<double> ar1(Rng& rng, std::size_t n, double rho) {
  std::vector<double> x(n);
  double s = rng.normal();
  for (auto& v : x) {
    s = rho * s + std::sqrt(1.0 - rho * rho) * rng.normal();
    v = s;
  }
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

SampleStore store_of(std::vector<std::pair<std::string, std::vector<double>>> cols) {
  SampleStore s;
  for (auto& [name, v] : cols) s.add_column(name, SampleStore::ColumnKind::value, std::move(v));
  return s;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("iid draws have ESS close to n") {
    Rng rng(1);
    std::vector<double> ratio;
    for (int r = 0; r < 41; ++r) ratio.push_back(batch_means_ess(iid(rng, 10000)) / 10000.0);
    // Median of 24 / chi2_24 is about 1.03.
    CHECK(median(ratio) >= 0.85);
    CHECK(median(ratio) <= 1.2);
  }

  TEST_CASE("blocks of repeated values divide the ESS by the block length") {
    Rng rng(2);
    std::vector<double> ratio;
    for (int r = 0; r < 41; ++r) {
      std::vector<double> x;
      for (int b = 0; b < 2500; ++b) x.insert(x.end(), 10, rng.normal());
      ratio.push_back(batch_means_ess(x) / 2500.0);
    }
    CHECK(median(ratio) >= 0.85);
    CHECK(median(ratio) <= 1.2);
  }

  TEST_CASE("AR(0.9) ESS fraction is near (1 - rho) / (1 + rho)") {
    Rng rng(3);
    std::vector<double> frac;
    for (int r = 0; r < 11; ++r) frac.push_back(batch_means_ess(ar1(rng, 100000, 0.9)) / 100000.0);
    CHECK(median(frac) >= 0.03);
    CHECK(median(frac) <= 0.08);
  }

  TEST_CASE("batch means failure modes") {
    const std::vector<double> constant(100, 2.0);
    CHECK_THROWS_AS(batch_means_ess(constant), UndefinedStatistic);
    const std::vector<double> short_seq(49, 1.0);
    CHECK_THROWS_AS(batch_means_ess(short_seq), ContractError);
    Rng rng(4);
    const auto x = iid(rng, 100);
    CHECK_THROWS_AS(batch_means_ess(x, 1), ContractError);
    // Constant batch means with varying draws.
    std::vector<double> alt(100);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
    CHECK_THROWS_AS(batch_means_ess(alt), UndefinedStatistic);
  }

  TEST_CASE("the remainder is dropped from the head") {
    Rng rng(5);
    auto x = iid(rng, 103);
    const std::vector<double> tail(x.begin() + 3, x.end());
    x[0] = 1e6;
    x[1] = -1e6;
    x[2] = 42.0;
    CHECK(batch_means_ess(x) == batch_means_ess(tail));
  }

  TEST_CASE("ESS is affine invariant and invariant under batch permutation") {
    Rng rng(6);
    const auto x = ar1(rng, 2500, 0.5);
    std::vector<double> y(x.size()), z;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = -3.0 * x[i] + 7.0;
    CHECK(batch_means_ess(y) == doctest::Approx(batch_means_ess(x)).epsilon(1e-9));
    for (int b = 24; b >= 0; --b) z.insert(z.end(), x.begin() + b * 100, x.begin() + (b + 1) * 100);
    CHECK(batch_means_ess(z) == doctest::Approx(batch_means_ess(x)).epsilon(1e-9));
  }

  TEST_CASE("thinning an AR(1) chain raises the ESS fraction") {
    Rng rng(7);
    const auto x = ar1(rng, 200000, 0.95);
    std::vector<double> thin;
    for (std::size_t i = 0; i < x.size(); i += 50) thin.push_back(x[i]);
    CHECK(batch_means_ess(thin) / thin.size() > 3.0 * batch_means_ess(x) / x.size());
  }

  TEST_CASE("min_ess_report picks the worst moment and skips constant columns") {
    Rng rng(8);
    auto store = store_of({{"fast", iid(rng, 5000)}, {"slow", ar1(rng, 5000, 0.9)},
                           {"flat", std::vector<double>(5000, 1.0)}});
    const auto rep = min_ess_report(store, {}, 1000);
    CHECK(rep.n == 5000);
    CHECK(rep.params.size() == 2);
    CHECK(rep.excluded == std::vector<std::string>{"flat"});
    CHECK(rep.min_param == "slow");
    CHECK(rep.min_ess == doctest::Approx(std::min(rep.params[1].ess_mean, rep.params[1].ess_second)));
    CHECK(rep.ess_per_eval == doctest::Approx(rep.min_ess / 1000.0));
    CHECK(min_ess_report(store, {"fast"}, 0).ess_per_eval == 0.0);

    const auto& col = store.column("slow");
    std::vector<double> sq(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) sq[i] = col[i] * col[i];
    CHECK(rep.params[1].ess_second == batch_means_ess(sq));

    CHECK_THROWS_AS(min_ess_report(SampleStore{}, {}, 1), ContractError);
    auto dead = store_of({{"a", std::vector<double>(100, 0.0)}});
    CHECK_THROWS_AS(min_ess_report(dead, {}, 1), UndefinedStatistic);
    CHECK_THROWS(min_ess_report(store, {"missing"}, 1));
  }

  TEST_CASE("summarize averages chains with a 1.96 sd band") {
    EssReport a, b;
    a.params = {{"x", 100.0, 80.0}, {"y", 50.0, 60.0}};
    b.params = {{"x", 120.0, 100.0}, {"y", 70.0, 40.0}};
    a.ess_per_eval = 0.1;
    b.ess_per_eval = 0.3;
    const auto s = summarize({a, b});
    CHECK(s.chains == 2);
    CHECK(s.mean_moment[0].mean == doctest::Approx(110.0));
    CHECK(s.mean_moment[0].sd == doctest::Approx(std::sqrt(200.0)));
    CHECK(s.mean_moment[0].lo == doctest::Approx(110.0 - 1.96 * std::sqrt(200.0)));
    CHECK(s.min_param == "y");
    CHECK(s.min_ess.mean == doctest::Approx(50.0));
    CHECK(s.ess_per_eval.mean == doctest::Approx(0.2));

    CHECK_THROWS_AS(summarize({a}), ContractError);
    EssReport c = b;
    c.params[1].name = "z";
    CHECK_THROWS_AS(summarize({a, c}), ContractError);
  }
}

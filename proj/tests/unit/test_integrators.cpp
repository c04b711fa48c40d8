#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "dhmc/errors.hpp"
#include "dhmc/integrators.hpp"
#include "dhmc/models/toy.hpp"
#include "dhmc/rng.hpp"
#include "helpers.hpp"

using namespace dhmc;
using dhmc::testing::FnTarget;

namespace {

double energy(const TargetModel& m, const PhaseState& s, const MassSpec& mass) {
  return hamiltonian(m, s, mass).hamiltonian;
}

// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_SUITE("integrators") {
  TEST_CASE("coord_step examples") {
    const MassSpec unit = MassSpec::identity(1);
    auto flat = dhmc::testing::flat(1);
    PhaseState s{{0.0}, {2.0}, Partition::all_disc(1)};
    auto o = coord_step(flat, s, 0, 0.5, unit);
    CHECK(s.theta[0] == 0.5);
    CHECK(s.p[0] == 2.0);
    CHECK(o.flips == 0);

    auto stepu = dhmc::testing::step(1, 1.0, 1.0);
    PhaseState a{{0.8}, {1.5}, Partition::all_disc(1)};
    o = coord_step(stepu, a, 0, 0.5, unit);
    CHECK(a.theta[0] == doctest::Approx(1.3));
    CHECK(a.p[0] == doctest::Approx(0.5));
    CHECK(o.flips == 0);

    PhaseState b{{0.8}, {0.5}, Partition::all_disc(1)};
    o = coord_step(stepu, b, 0, 0.5, unit);
    CHECK(b.theta[0] == 0.8);
    CHECK(b.p[0] == -0.5);
    CHECK(o.flips == 1);
  }

  TEST_CASE("coord_step ties, barriers and mass scaling") {
    const MassSpec unit = MassSpec::identity(1);
    auto stepu = dhmc::testing::step(1, 1.0, 1.0);
    PhaseState tie{{0.8}, {1.0}, Partition::all_disc(1)};
    CHECK(coord_step(stepu, tie, 0, 0.5, unit).flips == 1);
    CHECK(tie.p[0] == -1.0);

    FnTarget wall(1, [](std::span<const double> t) { return t[0] > 1.0 ? dhmc::testing::kInfinity : 0.0; });
    PhaseState w{{0.9}, {1e300}, Partition::all_disc(1)};
    CHECK(coord_step(wall, w, 0, 0.5, unit).flips == 1);
    CHECK(w.theta[0] == 0.9);

    // m = 2: displacement eps / m, kinetic |p| / m pays for the jump.
    const MassSpec m2{{2.0}, std::nullopt};
    PhaseState s{{0.8}, {3.0}, Partition::all_disc(1)};
    coord_step(stepu, s, 0, 0.5, m2);
    CHECK(s.theta[0] == doctest::Approx(1.05));
    CHECK(s.p[0] == doctest::Approx(1.0));

    // sign(0) = +1: a downhill slope to the right accepts the zero-momentum move.
    FnTarget downhill(1, [](std::span<const double> t) { return -t[0]; });
    PhaseState z{{0.0}, {0.0}, Partition::all_disc(1)};
    coord_step(downhill, z, 0, 0.25, unit);
    CHECK(z.theta[0] == 0.25);
    CHECK(z.p[0] == doctest::Approx(0.25));
  }

  TEST_CASE("coord_step errors and evaluation counts") {
    const MassSpec unit = MassSpec::identity(1);
    FnTarget nan_above(1, [](std::span<const double> t) { return t[0] > 0.5 ? std::nan("") : 0.0; });
    PhaseState s{{0.0}, {1.0}, Partition::all_disc(1)};
    CHECK_THROWS_AS(coord_step(nan_above, s, 0, 1.0, unit), ModelError);

    FnTarget wall(1, [](std::span<const double>) { return dhmc::testing::kInfinity; });
    PhaseState w{{0.0}, {1.0}, Partition::all_disc(1)};
    CHECK_THROWS_AS(coord_step(wall, w, 0, 1.0, unit), ContractError);

    auto flat = dhmc::testing::flat(1);
    PhaseState f{{0.0}, {1.0}, Partition::all_disc(1)};
    CHECK_THROWS_AS(coord_step(flat, f, 0, 0.0, unit), ContractError);
    CHECK(coord_step(flat, f, 0, 0.1, unit).potential_evals == 2);

    models::GaussianTarget g({1.0});
    PhaseState gs{{0.0}, {1.0}, Partition::all_disc(1)};
    CHECK(coord_step(g, gs, 0, 0.1, unit).potential_evals == 1);
  }

  TEST_CASE("coord_sweep on a flat target moves every coordinate") {
    auto flat = dhmc::testing::flat(2);
    PhaseState s{{0.0, 1.0}, {0.3, -2.0}, Partition::all_disc(2)};
    const MassSpec mass{{1.0, 4.0}, std::nullopt};
    auto o = coord_sweep(flat, s, SweepOrder::identity(s.part), 0.5, mass);
    CHECK(s.theta[0] == 0.5);
    CHECK(s.theta[1] == doctest::Approx(1.0 - 0.125));
    CHECK(o.flips == 0);
    CHECK(o.coord_updates == 2);
  }

  TEST_CASE("coord_sweep preserves the Hamiltonian and reverses") {
    Rng rng(21);
    models::StepTarget stepq(3, 0.7, 0.2, true);
    for (int k = 0; k < 300; ++k) {
      const Partition part = Partition::all_disc(3);
      const MassSpec mass{{0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.5 + rng.uniform()}, std::nullopt};
      PhaseState s{{2 * rng.normal(), 2 * rng.normal(), 2 * rng.normal()}, sample_momentum(rng, mass, part), part};
      const PhaseState start = s;
      const double eps = 0.05 + rng.uniform();
      const double h0 = energy(stepq, s, mass);
      const SweepOrder order = SweepOrder::random(part, rng);
      coord_sweep(stepq, s, order, eps, mass);
      CHECK(std::abs(energy(stepq, s, mass) - h0) <= 1e-10 * (1 + std::abs(h0)));
      for (auto& p : s.p) p = -p;
      coord_sweep(stepq, s, order.reversed(), eps, mass);
      for (auto& p : s.p) p = -p;
      for (int i = 0; i < 3; ++i) {
        CHECK(s.theta[i] == doctest::Approx(start.theta[i]).epsilon(1e-9));
        CHECK(s.p[i] == doctest::Approx(start.p[i]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("coordinate map has unit Jacobian away from branch boundaries") {
    auto quad = dhmc::testing::quadratic(2);
    const MassSpec unit = MassSpec::identity(2);
    const Partition part = Partition::all_disc(2);
    Rng rng(4);
    const SweepOrder order = SweepOrder::identity(part);
    const double eps = 0.3;
    auto map = [&](const Eigen::Vector4d& z, std::size_t& flips) {
      PhaseState s{{z[0], z[1]}, {z[2], z[3]}, part};
      flips = coord_sweep(quad, s, order, eps, unit).flips;
      return Eigen::Vector4d(s.theta[0], s.theta[1], s.p[0], s.p[1]);
    };
    int tested = 0;
    while (tested < 100) {
      const Eigen::Vector4d z(rng.normal(), rng.normal(), 2 * rng.normal(), 2 * rng.normal());
      std::size_t f0 = 0;
      map(z, f0);
      const double h = 1e-6;
      Eigen::Matrix4d J;
      bool consistent = true;
      for (int c = 0; c < 4; ++c) {
        Eigen::Vector4d e = Eigen::Vector4d::Zero();
        e[c] = h;
        std::size_t fp = 0, fm = 0;
        J.col(c) = (map(z + e, fp) - map(z - e, fm)) / (2 * h);
        consistent = consistent && fp == f0 && fm == f0;
      }
      if (!consistent || std::abs(z[2]) < 1e-3 || std::abs(z[3]) < 1e-3) continue;
      // flips reflect momentum, so the determinant is +-1
      CHECK(std::abs(std::abs(J.determinant()) - 1.0) <= 1e-5);
      ++tested;
    }
  }

  TEST_CASE("random sweep orders are reversal symmetric") {
    Rng rng(9);
    const Partition part = Partition::all_disc(3);
    std::map<std::vector<std::size_t>, int> counts;
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts[SweepOrder::random(part, rng).perm];
    CHECK(counts.size() == 6);
    for (const auto& [perm, c] : counts) {
      auto rev = perm;
      std::reverse(rev.begin(), rev.end());
      const double sd = std::sqrt(2.0 * n / 6.0);
      CHECK(std::abs(c - counts[rev]) < 4 * sd);
    }
  }

  TEST_CASE("dhmc_step with no smooth block equals coord_sweep bit for bit") {
    models::StepTarget stepq(3, 0.7, 0.2, true);
    Rng rng(2);
    const Partition part = Partition::all_disc(3);
    const MassSpec mass = MassSpec::identity(3);
    for (int k = 0; k < 50; ++k) {
      PhaseState a{{rng.normal(), rng.normal(), rng.normal()}, sample_momentum(rng, mass, part), part};
      PhaseState b = a;
      const SweepOrder order = SweepOrder::random(part, rng);
      SmoothCache cache;
      coord_sweep(stepq, a, order, 0.4, mass);
      dhmc_step(stepq, b, order, 0.4, mass, cache);
      CHECK(a.theta == b.theta);
      CHECK(a.p == b.p);
    }
  }

  TEST_CASE("dhmc_step on a harmonic oscillator: small local error of order three") {
    auto quad = dhmc::testing::quadratic(1);
    const MassSpec unit = MassSpec::identity(1);
    std::vector<double> eps_grid = {0.2, 0.1, 0.05, 0.025}, err;
    for (double eps : eps_grid) {
      PhaseState s{{1.0}, {0.0}, Partition::all_smooth(1)};
      SmoothCache cache;
      const double h0 = energy(quad, s, unit);
      dhmc_step(quad, s, SweepOrder{}, eps, unit, cache);
      // Exact flow from (1, 0) for time eps.
      const double theta_exact = std::cos(eps), p_exact = -std::sin(eps);
      if (eps == 0.1) {
        CHECK(std::abs(energy(quad, s, unit) - h0) <= 1e-4);
        CHECK(std::abs(s.theta[0] - theta_exact) <= 1e-3);
        CHECK(std::abs(s.p[0] - p_exact) <= 1e-3);
      }
      err.push_back(std::abs(energy(quad, s, unit) - h0));
    }
    CHECK(loglog_slope(eps_grid, err) >= 2.7);
  }

  TEST_CASE("dhmc_step local error across a discontinuity is of order two") {
    // x smooth, n discrete; the x-force jumps with n.
    models::MixedToyTarget mixed({0.2, 0.5, 0.3}, 2.0);
    const MassSpec unit = MassSpec::identity(2);
    const Partition part{{0}, {1}};
    std::vector<double> eps_grid = {0.2, 0.1, 0.05, 0.025}, err;
    for (double eps : eps_grid) {
      // Start just below the knot between n = 1 and n = 2 so the sweep crosses it.
      PhaseState s{{0.3, 2.0 - 0.5 * eps}, {0.8, 6.0}, part};
      SmoothCache cache;
      const double h0 = energy(mixed, s, unit);
      auto o = dhmc_step(mixed, s, SweepOrder::identity(part), eps, unit, cache);
      CHECK(o.flips == 0);
      err.push_back(std::abs(energy(mixed, s, unit) - h0));
    }
    CHECK(loglog_slope(eps_grid, err) >= 1.8);
  }

  TEST_CASE("dhmc_step flags a drift out of the support") {
    FnTarget halfline(
        1, [](std::span<const double> t) { return t[0] < 0.0 ? dhmc::testing::kInfinity : 0.5 * t[0] * t[0]; },
        [](std::span<const double> t, std::span<double> g) { g[0] = t[0]; });
    PhaseState s{{0.05}, {-5.0}, Partition::all_smooth(1)};
    SmoothCache cache;
    CHECK(dhmc_step(halfline, s, SweepOrder{}, 0.2, MassSpec::identity(1), cache).divergent);
  }

  TEST_CASE("leapfrog is exact for a linear potential") {
    FnTarget linear(1, [](std::span<const double> t) { return t[0]; },
                    [](std::span<const double>, std::span<double> g) { g[0] = 1.0; });
    PhaseState s{{0.5}, {2.0}, Partition::all_smooth(1)};
    SmoothCache cache;
    const double eps = 0.1;
    for (int k = 1; k <= 50; ++k) {
      leapfrog_step(linear, s, eps, MassSpec::identity(1), cache);
      const double t = k * eps;
      CHECK(std::abs(s.theta[0] - (0.5 + 2.0 * t - 0.5 * t * t)) <= 1e-12);
      CHECK(std::abs(s.p[0] - (2.0 - t)) <= 1e-12);
    }
  }

  TEST_CASE("leapfrog over half a period of the oscillator") {
    auto quad = dhmc::testing::quadratic(1);
    PhaseState s{{1.0}, {0.0}, Partition::all_smooth(1)};
    SmoothCache cache;
    const double eps = 0.01;
    const int steps = static_cast<int>(std::round(std::numbers::pi / eps));
    const double h0 = energy(quad, s, MassSpec::identity(1));
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
      leapfrog_step(quad, s, eps, MassSpec::identity(1), cache);
      worst = std::max(worst, std::abs(energy(quad, s, MassSpec::identity(1)) - h0));
    }
    CHECK(worst <= 1e-3);
    CHECK(s.theta[0] == doctest::Approx(std::cos(steps * eps)).epsilon(1e-3));
    PhaseState mixed{{0.0, 0.0}, {1.0, 1.0}, Partition{{0}, {1}}};
    CHECK_THROWS_AS(leapfrog_step(dhmc::testing::quadratic(2), mixed, eps, MassSpec::identity(2), cache), ContractError);
  }

  TEST_CASE("leapfrog across a jump keeps an order-one energy error") {
    // The jump is invisible to the gradient, so the whole height is lost.
    FnTarget jump(1, [](std::span<const double> t) { return t[0] >= 0.0 ? 1.0 : 0.0; },
                  [](std::span<const double>, std::span<double> g) { g[0] = 0.0; });
    for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
      PhaseState s{{-0.5 * eps}, {1.0}, Partition::all_smooth(1)};
      SmoothCache cache;
      const double h0 = energy(jump, s, MassSpec::identity(1));
      leapfrog_step(jump, s, eps, MassSpec::identity(1), cache);
      CHECK(std::abs(energy(jump, s, MassSpec::identity(1)) - h0) >= 0.5);
    }
  }

  TEST_CASE("refract or reflect examples") {
    CHECK(refract_or_reflect(2.0, 1.5, 1.0) == doctest::Approx(1.0));
    CHECK(refract_or_reflect(1.0, 1.5, 1.0) == -1.0);
    CHECK(refract_or_reflect(-2.0, 1.5, 1.0) == doctest::Approx(-1.0));
    CHECK(refract_or_reflect(1.0, -1.5, 1.0) == doctest::Approx(2.0));
    CHECK(refract_or_reflect(1.0, INFINITY, 1.0) == -1.0);
    // Tie reflects.
    CHECK(refract_or_reflect(1.0, 0.5, 1.0) == -1.0);
  }

  TEST_CASE("event step on a single flat cell has no events") {
    FnTarget flat(2, [](std::span<const double>) { return 0.0; });
    flat.set_embeddings(EmbeddingMap::custom({-100.0, 100.0}, 0));
    PhaseState s{{0.0, 0.0}, {1.0, 1.0}, Partition::all_smooth(2)};
    auto o = gaussian_event_step(flat, s, 2.7, MassSpec::identity(2));
    CHECK(s.theta[0] == doctest::Approx(2.7));
    CHECK(s.theta[1] == doctest::Approx(2.7));
    CHECK(o.events == 0);
  }

  TEST_CASE("event step refracts and reflects at cell boundaries") {
    // Cells (0,1], (1,2]; potential 0 then 1.5.
    FnTarget two(1, [](std::span<const double> t) { return t[0] > 1.0 ? 1.5 : 0.0; });
    two.set_embeddings(EmbeddingMap::custom({0.0, 1.0, 2.0}, 0));
    PhaseState pass{{0.5}, {2.0}, Partition::all_smooth(1)};
    auto o = gaussian_event_step(two, pass, 0.5, MassSpec::identity(1));
    CHECK(o.events == 1);
    CHECK(pass.p[0] == doctest::Approx(1.0));
    CHECK(pass.theta[0] == doctest::Approx(1.0 + 0.25 * 1.0));

    PhaseState bounce{{0.5}, {1.0}, Partition::all_smooth(1)};
    o = gaussian_event_step(two, bounce, 0.75, MassSpec::identity(1));
    CHECK(o.flips == 1);
    CHECK(bounce.p[0] == -1.0);
    CHECK(bounce.theta[0] == doctest::Approx(0.75));

    // Leaving the outermost knot reflects.
    PhaseState edge{{1.5}, {1.0}, Partition::all_smooth(1)};
    gaussian_event_step(two, edge, 1.0, MassSpec::identity(1));
    CHECK(edge.p[0] == -1.0);
    CHECK(edge.theta[0] == doctest::Approx(1.5));
  }

  TEST_CASE("event step preserves energy on the banana grid") {
    models::BananaTarget banana(0.5, 10.0);
    Rng rng(14);
    const Partition part = Partition::all_smooth(2);
    const MassSpec unit = MassSpec::identity(2);
    for (int k = 0; k < 300; ++k) {
      PhaseState s{{rng.uniform(-3, 3), rng.uniform(-3, 3)}, sample_momentum(rng, unit, part), part};
      if (std::isinf(banana.potential(s.theta))) continue;
      const double h0 = energy(banana, s, unit);
      gaussian_event_step(banana, s, 0.5 + rng.uniform(), unit);
      CHECK(std::abs(energy(banana, s, unit) - h0) <= 1e-10 * (1 + std::abs(h0)));
    }
  }

  TEST_CASE("event step rejects targets without a grid") {
    auto quad = dhmc::testing::quadratic(1);
    PhaseState s{{0.0}, {1.0}, Partition::all_smooth(1)};
    CHECK_THROWS_AS(gaussian_event_step(quad, s, 1.0, MassSpec::identity(1)), UnsupportedTarget);
  }
}

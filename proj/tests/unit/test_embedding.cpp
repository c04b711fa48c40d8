#include <cmath>

#include "doctest.h"
#include "dhmc/embedding.hpp"
#include "dhmc/errors.hpp"
#include "dhmc/rng.hpp"

using namespace dhmc;

TEST_SUITE("embedding") {
  TEST_CASE("lookup on uniform knots uses right-closed intervals") {
    const auto m = EmbeddingMap::uniform(1, 10);
    CHECK(m.lookup(2.5) == 2);
    CHECK(m.lookup(3.0) == 2);
    CHECK(m.lookup(std::nextafter(3.0, 4.0)) == 3);
    CHECK(m.lookup(11.0) == 10);
    CHECK_THROWS_AS(m.lookup(1.0), OutOfSupport);
    CHECK_THROWS_AS(m.lookup(11.000001), OutOfSupport);
    CHECK_FALSE(m.interval(0.5).has_value());
    CHECK(m.interval(1.5).value() == 0);
  }

  TEST_CASE("lookup on logarithmic knots") {
    const auto m = EmbeddingMap::logarithmic(1, 10);
    CHECK(m.lookup(std::log(7.0) + 1e-9) == 7);
    CHECK(m.lookup(std::log(7.0)) == 6);
    CHECK(m.lower() == 0.0);
    CHECK(m.width(1) == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(EmbeddingMap::logarithmic(0, 5), ContractError);
  }

  TEST_CASE("embed_center examples") {
    CHECK(EmbeddingMap::uniform(1, 5).embed_center(3) == doctest::Approx(3.5));
    CHECK(EmbeddingMap::logarithmic(1, 5).embed_center(1) == doctest::Approx(0.5 * std::log(2.0)));
    CHECK_THROWS_AS(EmbeddingMap::uniform(1, 5).embed_center(6), ContractError);
    CHECK_THROWS_AS(EmbeddingMap::uniform(1, 5).embed_center(0), ContractError);
  }

  TEST_CASE("offset supports") {
    const auto m = EmbeddingMap::uniform(7, 9);
    CHECK(m.first_value() == 7);
    CHECK(m.last_value() == 9);
    CHECK(m.lookup(7.5) == 7);
    CHECK(m.size() == 3);
  }

  TEST_CASE("custom knots are validated") {
    CHECK_THROWS_AS(EmbeddingMap::custom({1.0}, 0), ContractError);
    CHECK_THROWS_AS(EmbeddingMap::custom({1.0, 1.0}, 0), ContractError);
    CHECK_THROWS_AS(EmbeddingMap::custom({0.0, 2.0, 1.0}, 0), ContractError);
    CHECK_THROWS_AS(EmbeddingMap::custom({0.0, INFINITY}, 0), ContractError);
    const auto m = EmbeddingMap::custom({-1.0, 0.0, 2.5}, -3);
    CHECK(m.lookup(1.0) == -2);
    CHECK(m.kind() == EmbeddingMap::Kind::custom);
  }

  TEST_CASE("log_density examples") {
    const auto half = [](std::int64_t) { return std::log(0.5); };
    const EmbeddedPrior u{EmbeddingMap::uniform(1, 2), half};
    CHECK(u.log_density(1.5) == doctest::Approx(std::log(0.5)));
    CHECK(u.log_density(0.5) == -INFINITY);
    const EmbeddedPrior l{EmbeddingMap::logarithmic(1, 2), half};
    CHECK(l.log_density(0.5 * std::log(2.0)) == doctest::Approx(std::log(0.5 / std::log(2.0))));
  }

  TEST_CASE("round trip and interval interiors") {
    for (const auto& m : {EmbeddingMap::uniform(-3, 40), EmbeddingMap::logarithmic(1, 60),
                          EmbeddingMap::custom({0.0, 0.1, 0.5, 0.55, 3.0}, 2)}) {
      for (std::int64_t n = m.first_value(); n <= m.last_value(); ++n) {
        CHECK(m.lookup(m.embed_center(n)) == n);
        const auto k = static_cast<std::size_t>(n - m.first_value());
        const double a = m.knots()[k], b = m.knots()[k + 1];
        for (double t : {1e-6, 0.25, 0.5, 0.75, 1.0}) CHECK(m.lookup(a + t * (b - a)) == n);
      }
    }
  }

  TEST_CASE("partition property and normalization") {
    const auto m = EmbeddingMap::logarithmic(1, 12);
    std::vector<double> pmf(12);
    double total = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) total += pmf[k] = 1.0 / static_cast<double>((k + 1) * (k + 2));
    const EmbeddedPrior prior{m, [&](std::int64_t n) { return std::log(pmf[static_cast<std::size_t>(n - 1)]); }};

    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
      const double x = m.lower() + (m.upper() - m.lower()) * (1.0 - rng.uniform());
      int claims = 0;
      for (std::size_t k = 0; k < m.size(); ++k) claims += (m.knots()[k] < x && x <= m.knots()[k + 1]);
      CHECK(claims == 1);
      CHECK(m.interval(x).has_value());
    }

    // Trapezoid per interval on interior grids; the density is constant inside
    // each interval, so this is exact up to roundoff.
    double integral = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double a = m.knots()[k], b = m.knots()[k + 1];
      const int g = 200;
      const double h = (b - a) / g;
      double s = 0.0;
      for (int i = 0; i <= g; ++i) {
        const double x = i == 0 ? std::nextafter(a, b) : (i == g ? b : a + h * i);
        s += (i == 0 || i == g ? 0.5 : 1.0) * std::exp(prior.log_density(x));
      }
      integral += s * h;
    }
    CHECK(std::abs(integral - total) < 1e-6);
  }
}

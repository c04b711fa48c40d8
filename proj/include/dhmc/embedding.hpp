#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace dhmc {

// Embeds an ordinal parameter N into the real line: N = n  <=>  x in (a_n, a_{n+1}].
// Ordinals run from `first_value()` to `last_value()`; interval k (0-based)
// holds the ordinal first_value() + k.
class EmbeddingMap {
 public:
  enum class Kind { uniform, logarithmic, custom };

  // a_n = n for n = first..last+1.
  static EmbeddingMap uniform(std::int64_t first, std::int64_t last);
  // a_n = log n for n = first..last+1; requires first >= 1.
  static EmbeddingMap logarithmic(std::int64_t first, std::int64_t last);
  static EmbeddingMap custom(std::vector<double> knots, std::int64_t first_value);

  // Ordinal whose interval contains x; OutOfSupport outside (a_first, a_last+1].
  std::int64_t lookup(double x) const;
  // 0-based interval index, or nullopt outside the support.
  std::optional<std::size_t> interval(double x) const noexcept;

  double embed_center(std::int64_t n) const;
  double width(std::int64_t n) const;
  double lower() const { return knots_.front(); }
  double upper() const { return knots_.back(); }

  std::size_t size() const { return knots_.size() - 1; }
  std::int64_t first_value() const { return first_; }
  std::int64_t last_value() const { return first_ + static_cast<std::int64_t>(size()) - 1; }
  std::span<const double> knots() const { return knots_; }
  Kind kind() const { return kind_; }

 private:
  EmbeddingMap(std::vector<double> knots, std::int64_t first, Kind kind);
  std::size_t checked_index(std::int64_t n) const;

  std::vector<double> knots_;
  std::int64_t first_;
  Kind kind_;
};

// Piecewise-constant density of the embedded parameter:
//   pi(x) = pi_N(n) / (a_{n+1} - a_n)   for x in (a_n, a_{n+1}].
struct EmbeddedPrior {
  EmbeddingMap map;
  std::function<double(std::int64_t)> log_pmf;

  // -inf outside the support.
  double log_density(double x) const;
};

}  // namespace dhmc

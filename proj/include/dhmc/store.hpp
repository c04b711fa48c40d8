#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhmc/core.hpp"

namespace dhmc {

// Column-oriented draws. For an embedded coordinate `name` holds the decoded
// ordinal and `name.embedded` the real-valued position.
class SampleStore {
 public:
  enum class ColumnKind { value, embedded, derived };

  SampleStore() = default;
  // Column layout for `model`: one value column per coordinate, an embedded
  // column after each embedded coordinate, then the derived columns.
  explicit SampleStore(const TargetModel& model);

  void append(const TargetModel& model, std::span<const double> theta);
  // Appends a row given in column order.
  void append_row(std::span<const double> row);

  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  ColumnKind kind(std::size_t c) const { return kinds_[c]; }
  const std::vector<double>& column(std::size_t c) const { return columns_[c]; }
  const std::vector<double>& column(const std::string& name) const;
  std::optional<std::size_t> find(const std::string& name) const;

  // Adds a column; it must have the current row count.
  void add_column(std::string name, ColumnKind kind, std::vector<double> values);

 private:
  std::vector<std::string> names_;
  std::vector<ColumnKind> kinds_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> scratch_;
};

// Position vector of draw `row`, rebuilt from the value and embedded columns.
std::vector<double> theta_at(const SampleStore& store, const TargetModel& model, std::size_t row);

}  // namespace dhmc

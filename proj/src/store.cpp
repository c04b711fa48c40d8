#include "dhmc/store.hpp"

#include <algorithm>

#include "dhmc/embedding.hpp"

namespace dhmc {

SampleStore::SampleStore(const TargetModel& model) {
  const auto params = model.parameter_names();
  for (std::size_t j = 0; j < model.dim(); ++j) {
    names_.push_back(params[j]);
    kinds_.push_back(ColumnKind::value);
    if (model.embedding(j)) {
      names_.push_back(params[j] + ".embedded");
      kinds_.push_back(ColumnKind::embedded);
    }
  }
  for (auto& n : model.derived_names()) {
    names_.push_back(n);
    kinds_.push_back(ColumnKind::derived);
  }
  columns_.resize(names_.size());
}

void SampleStore::append(const TargetModel& model, std::span<const double> theta) {
  std::size_t c = 0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (const auto* map = model.embedding(j)) {
      columns_[c++].push_back(static_cast<double>(map->lookup(theta[j])));
      columns_[c++].push_back(theta[j]);
    } else {
      columns_[c++].push_back(theta[j]);
    }
  }
  model.derived(theta, scratch_);
  for (double v : scratch_) columns_[c++].push_back(v);
  if (c != columns_.size()) throw ContractError("row does not match the store layout");
}

void SampleStore::append_row(std::span<const double> row) {
  if (row.size() != columns_.size()) throw ContractError("row does not match the store layout");
  for (std::size_t c = 0; c < row.size(); ++c) columns_[c].push_back(row[c]);
}

std::optional<std::size_t> SampleStore::find(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& SampleStore::column(const std::string& name) const {
  const auto c = find(name);
  if (!c) throw ContractError("no column named " + name);
  return columns_[*c];
}

void SampleStore::add_column(std::string name, ColumnKind kind, std::vector<double> values) {
  if (!columns_.empty() && values.size() != rows()) throw ContractError("column length does not match the store");
  names_.push_back(std::move(name));
  kinds_.push_back(kind);
  columns_.push_back(std::move(values));
}

std::vector<double> theta_at(const SampleStore& store, const TargetModel& model, std::size_t row) {
  const auto names = model.parameter_names();
  std::vector<double> theta(model.dim());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    theta[j] = store.column(model.embedding(j) ? names[j] + ".embedded" : names[j])[row];
  }
  return theta;
}

}  // namespace dhmc

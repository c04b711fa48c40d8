#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dhmc/models/gen_bayes.hpp"
#include "dhmc/models/jolly_seber.hpp"

namespace dhmc::app {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  // Index of `name`; DataError when missing.
  std::size_t index(const std::string& name) const;
};

// Comma-separated with a header row; DataError on malformed input.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

models::ClassificationData load_classification(const std::filesystem::path& path);
void save_classification(const std::filesystem::path& path, const models::ClassificationData& data);

std::vector<double> load_series(const std::filesystem::path& path);
void save_series(const std::filesystem::path& path, const std::vector<double>& y);

models::JollySeberData load_jolly_seber(const std::filesystem::path& path);
void save_jolly_seber(const std::filesystem::path& path, const models::JollySeberData& data);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dhmc::app

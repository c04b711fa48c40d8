#include "dhmc/app/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dhmc/errors.hpp"

namespace dhmc::app {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::index(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw DataError("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, const fs::path& path, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::int64_t as_count(double v, const std::string& what) {
  if (!(v >= 0.0) || v != std::floor(v)) throw DataError(what + " must be a nonnegative integer");
  return static_cast<std::int64_t>(v);
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + " is empty");
  strip_cr(line);
  t.header = split(line);
  t.columns.resize(t.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) t.columns[c].push_back(parse_cell(cells[c], path, lineno));
  }
  return t;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.columns[c][r]);
    out << '\n';
  }
}

models::ClassificationData load_classification(const fs::path& path) {
  const auto t = read_csv(path);
  const std::size_t yc = t.index("y");
  models::ClassificationData d;
  const auto n = static_cast<Eigen::Index>(t.rows());
  d.X.resize(n, static_cast<Eigen::Index>(t.header.size() - 1));
  Eigen::Index j = 0;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == yc) continue;
    for (Eigen::Index i = 0; i < n; ++i) d.X(i, j) = t.columns[c][static_cast<std::size_t>(i)];
    ++j;
  }
  for (double v : t.columns[yc]) d.y.push_back(static_cast<int>(v));
  d.validate();
  return d;
}

void save_classification(const fs::path& path, const models::ClassificationData& data) {
  CsvTable t;
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
    t.header.push_back("x" + std::to_string(j + 1));
    t.columns.emplace_back(data.X.col(j).data(), data.X.col(j).data() + data.X.rows());
  }
  t.header.push_back("y");
  t.columns.emplace_back(data.y.begin(), data.y.end());
  write_csv(path, t);
}

std::vector<double> load_series(const fs::path& path) {
  const auto t = read_csv(path);
  auto y = t.columns[t.index("y")];
  if (y.empty()) throw DataError(path.string() + " has no observations");
  return y;
}

void save_series(const fs::path& path, const std::vector<double>& y) {
  CsvTable t{{"t", "y"}, {{}, y}};
  for (std::size_t i = 0; i < y.size(); ++i) t.columns[0].push_back(static_cast<double>(i + 1));
  write_csv(path, t);
}

models::JollySeberData load_jolly_seber(const fs::path& path) {
  const auto t = read_csv(path);
  models::JollySeberData d;
  auto col = [&](const char* name, std::vector<std::int64_t>& out) {
    for (double v : t.columns[t.index(name)]) out.push_back(as_count(v, name));
  };
  col("R", d.R);
  col("r", d.r);
  col("z", d.z);
  col("m", d.m);
  col("u", d.u);
  d.validate();
  return d;
}

void save_jolly_seber(const fs::path& path, const models::JollySeberData& d) {
  CsvTable t{{"occasion", "R", "r", "z", "m", "u"}, std::vector<std::vector<double>>(6)};
  for (std::size_t i = 0; i < d.occasions(); ++i) {
    t.columns[0].push_back(static_cast<double>(i + 1));
    t.columns[1].push_back(static_cast<double>(d.R[i]));
    t.columns[2].push_back(static_cast<double>(d.r[i]));
    t.columns[3].push_back(static_cast<double>(d.z[i]));
    t.columns[4].push_back(static_cast<double>(d.m[i]));
    t.columns[5].push_back(static_cast<double>(d.u[i]));
  }
  write_csv(path, t);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace dhmc::app

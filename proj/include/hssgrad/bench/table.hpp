#pragma once

// Run tables: one row per run, written as CSV and summarized into JSON.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hssgrad::bench {

using Cell = std::variant<std::int64_t, double, std::string>;

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) {
    std::ostringstream s;
    s << std::setprecision(std::numeric_limits<double>::max_digits10) << *d;
    return s.str();
  }
  const auto& str = std::get<std::string>(c);
  if (str.find_first_of(",\"\n") == std::string::npos) return str;
  std::string q = "\"";
  for (char ch : str) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline nlohmann::json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, c);
}

class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("Table::add: row width mismatch");
    rows_.push_back(std::move(row));
  }

  std::size_t index(const std::string& column) const {
    const auto it = std::find(columns_.begin(), columns_.end(), column);
    if (it == columns_.end()) throw std::out_of_range("Table: no column '" + column + "'");
    return static_cast<std::size_t>(it - columns_.begin());
  }

  const Cell& at(std::size_t row, const std::string& column) const { return rows_.at(row).at(index(column)); }

  double number(std::size_t row, const std::string& column) const {
    const Cell& c = at(row, column);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&c)) return *d;
    throw std::invalid_argument("Table: column '" + column + "' is not numeric");
  }

  std::string text(std::size_t row, const std::string& column) const { return format_cell(at(row, column)); }

  void write_csv(std::ostream& out) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) out << (j ? "," : "") << columns_[j];
    out << '\n';
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << format_cell(r[j]);
      out << '\n';
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows_) {
      nlohmann::json o;
      for (std::size_t j = 0; j < r.size(); ++j) o[columns_[j]] = cell_json(r[j]);
      arr.push_back(std::move(o));
    }
    return arr;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Groups rows by the `keys` columns (in first-seen order) and reports count,
/// mean and median of each `values` column.
inline nlohmann::json summarize(const Table& t, const std::vector<std::string>& keys,
                                const std::vector<std::string>& values) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<std::string, nlohmann::json> key_json;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::string id;
    nlohmann::json kj = nlohmann::json::object();
    for (const auto& k : keys) {
      id += t.text(r, k) + '\x1f';
      kj[k] = cell_json(t.at(r, k));
    }
    if (!groups.count(id)) {
      order.push_back(id);
      key_json[id] = kj;
    }
    groups[id].push_back(r);
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& id : order) {
    nlohmann::json g = key_json[id];
    g["runs"] = groups[id].size();
    for (const auto& v : values) {
      std::vector<double> xs;
      for (auto r : groups[id]) xs.push_back(t.number(r, v));
      g["mean"][v] = mean_of(xs);
      g["median"][v] = median_of(xs);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace hssgrad::bench

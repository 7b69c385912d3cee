#include "fastconv/trajectory.hpp"

#include <algorithm>
#include <cstdio>

#include "fastconv/error.hpp"

namespace fastconv {

void Trajectory::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error("trajectory: row width mismatch");
  rows.push_back(std::move(row));
}

std::size_t Trajectory::index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("trajectory: no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Trajectory::column(const std::string& name) const {
  const std::size_t j = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

void Trajectory::write_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
  os << '\n';
  char buf[32];
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", r[j]);
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace fastconv

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fastconv/engine.hpp"

namespace fastconv {

/// Tabular run output. Time steppers write one row per accepted step with t and h first.
struct Trajectory {
  std::vector<std::string> columns{"t", "h"};
  std::vector<std::vector<double>> rows;
  std::map<std::string, Eigen::VectorXd> final_state;
  Counters counters;
  std::string status = "completed";
  std::string message;

  void add(std::vector<double> row);
  std::size_t size() const { return rows.size(); }
  std::vector<double> column(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  bool ok() const { return status != "failed"; }

  void write_csv(std::ostream& os) const;
};

}  // namespace fastconv

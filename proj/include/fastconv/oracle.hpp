#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fastconv/kernels.hpp"

namespace fastconv {

/// Exact convolution of the piecewise linear interpolant of g with f at every grid
/// point, O(N^2). Uses the closed forms of f1, f2 when present and otherwise a
/// K = 80 inversion per evaluation distance. samples[j] is g(grid[j]).
std::vector<Eigen::VectorXd> oracle_convolve(const SectorialTransform& F, std::span<const double> grid,
                                             std::span<const Eigen::VectorXd> samples);

/// Scalar convenience overload.
std::vector<double> oracle_convolve(const SectorialTransform& F, std::span<const double> grid,
                                    std::span<const double> samples);

}  // namespace fastconv

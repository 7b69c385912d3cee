#pragma once

#include <functional>

#include "fastconv/contour.hpp"
#include "fastconv/trajectory.hpp"

namespace fastconv {

/// a(t) = pi^(-1/4) / sqrt(1 + 2it).
cplx abel_forcing(double t);

/// z(t) + gamma (sqrt(i)/2) int_0^t (pi (t-s))^(-1/2) |z|^(2 sigma) z ds = a(t).
struct AbelProblem {
  double gamma = -2.5;
  double sigma_exp = 1.0;
  std::function<cplx(double)> forcing = abel_forcing;
  double tol = 1e-7;
  double t_end = 0.5;
  double h0 = 1e-5;
  /// Smallest step the engine resolves; also the controller guard.
  double h_min = 1e-11;
  /// The run stops once |z| exceeds this value.
  double blowup_threshold = 100.0;
  /// Stop after this many accepted steps (0 = no limit).
  std::size_t max_steps = 0;
  ContourConstants contour = contour_preset("abel");
  int B = 5;
};

/// Columns: t, h, re, im, abs, gamma2, rejects.
Trajectory abel_solve(const AbelProblem& problem);

}  // namespace fastconv

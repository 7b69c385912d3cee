#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fastconv/contour.hpp"
#include "fastconv/trajectory.hpp"

namespace fastconv {

/// Three species on a periodic 1D grid, reactions A + B -> C, C -> A + B, C -> A + P,
/// with diffusion and reaction behind a fractional integral of order alpha.
struct FracRDProblem {
  double alpha = 0.5;
  double K_diff = 0.5;
  double k1 = 1.0;
  double k2 = 2.0;
  double k3 = 3.0;
  int M_nodes = 50;
  double x_lo = -5.0;
  double x_hi = 5.0;
  double T = 30.0;
  double tol = 1e-4;
  double h0 = 1e-5;
  double h_min = 1e-7;
  /// Stacked [u1; u2; u3]; empty selects the default smoothed steps.
  Eigen::VectorXd u0;
  ContourConstants contour = contour_preset("fracrd");
  int B = 5;
};

Eigen::VectorXd fracrd_grid(const FracRDProblem& p);
Eigen::VectorXd fracrd_default_initial(const FracRDProblem& p);

/// Linear part K (I3 x S) + R.
Eigen::SparseMatrix<double> fracrd_linear_operator(const FracRDProblem& p);
/// g(v) = (K (I3 x S) + R) v + k1 e x (v1 v2).
Eigen::VectorXd fracrd_rhs(const FracRDProblem& p, const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& v);

/// Spatial sum of u1 + u3.
double fracrd_conserved(const FracRDProblem& p, const Eigen::VectorXd& u);

/// Adaptive run with the first-difference controller.
/// Columns: t, h, gamma1, rejects, conserved, then u1_*, u2_*, u3_*.
Trajectory fracrd_solve(const FracRDProblem& p);

/// Same scheme on the uniform grid of step h (no controller).
Trajectory fracrd_solve_fixed(const FracRDProblem& p, double h);

}  // namespace fastconv

#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fastconv/contour.hpp"
#include "fastconv/trajectory.hpp"

namespace fastconv {

struct Lame {
  double mu;
  double lambda;
};
/// Plane-strain Lame constants from Young's modulus and Poisson ratio.
Lame lame_from_young(double E, double nu_p);

/// Semi-discrete linear elasticity M u'' + A u = b(t) after Dirichlet elimination,
/// with b(t) = amplitude(t) * load.
struct ElasticModel {
  Eigen::SparseMatrix<double> M;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd load;
  Eigen::Index probe_x = 0;
  Eigen::Index probe_y = 1;
};

/// Full stiffness and mass on a structured rectangle before any boundary condition,
/// two DOFs per node ordered (x, y) and nodes ordered row by row.
struct RawAssembly {
  Eigen::SparseMatrix<double> M;
  Eigen::SparseMatrix<double> A;
  Eigen::MatrixXd nodes;  // (nx+1)(ny+1) x 2
};
RawAssembly assemble_rectangle(int nx, int ny, double E, double nu_p, double rho, double Lx, double Ly);

/// Cantilever on [0, Lx] x [0, Ly] clamped at x = 0 with a unit traction (1, 1) on x = Lx.
/// The probe is the upper right corner.
ElasticModel assemble_cantilever(int nx, int ny, double E, double nu_p, double rho, double Lx = 4.0,
                                 double Ly = 1.0);

/// Coordinate text files "row col value" (1-based) and one value per line.
Eigen::SparseMatrix<double> read_coordinate_matrix(const std::string& path);
Eigen::VectorXd read_vector(const std::string& path);

/// 20 exp(1 / ((2t - 5)^8 - 1)) on (2, 3), zero elsewhere.
double boundary_force(double t);

struct ViscoProblem {
  ElasticModel model;
  double alpha = 0.5;
  double gamma = 0.3;
  double eps = 1e-4;
  double t_end = 6.0;
  std::function<double(double)> amplitude = boundary_force;
  /// Empty selects the lowest vibration mode and zero momentum.
  Eigen::VectorXd u0;
  Eigen::VectorXd v0;
  ContourConstants contour = contour_preset("visco");
  int B = 5;
  double h_min = 1e-9;
  std::size_t max_steps = 0;
};

/// Lowest generalized eigenvector of A x = w^2 M x with unit Euclidean norm.
Eigen::VectorXd lowest_mode(const ElasticModel& m);

/// Energy 1/2 v^T M^-1 v + 1/2 u^T A u for momenta v = M u'.
double elastic_energy(const ElasticModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Variable-step Stormer-Verlet with the integrating controller and the memory term
/// gamma (f * (A u - b)) where F(s) = 1/(1 + s^alpha).
/// Columns: t, h, z, ux, uy, vx, vy, ax, ay, energy. final_state holds u and v.
Trajectory visco_solve(const ViscoProblem& p);

}  // namespace fastconv

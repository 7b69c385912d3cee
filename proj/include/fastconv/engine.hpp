#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fastconv/contour.hpp"
#include "fastconv/kernels.hpp"

namespace fastconv {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

struct Counters {
  std::uint64_t F_evaluations = 0;
  std::uint64_t ode_advances = 0;
  std::uint64_t direct_steps = 0;
  std::uint64_t stored_vectors_peak = 0;
  std::uint64_t g_reads = 0;
  /// Largest number of distinct past g timestamps read while evaluating one step.
  std::uint64_t g_reads_step_max = 0;
  /// Extra pieces created when a direct step spans more than one contour.
  std::uint64_t split_direct_steps = 0;

  std::string to_json() const;
};

struct Decomposition {
  int L = 0;
  std::vector<int> digits;  // digits[l-1] = b_l
};

/// Smallest c with c*h_min >= t.
long long ceil_units(double t, double h_min);

/// ceil(t/h_min) = 2 + sum b_l B^(l-1) with b_l in 1..B; L = 0 when the ceiling is <= 2.
Decomposition decompose(double t, double h_min, int B);

/// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2.
cplx phi1(cplx z);
cplx phi2(cplx z);

/// Exact solution at t0+dt of y' = lambda y + g(t), g linear from g0 to g1, y(t0) = y0.
cplx exp_euler_step(cplx lambda, double dt, cplx y0, cplx g0, cplx g1);

/// One ODE bank: solutions y(tcur; tini, lambda_k) for the bank nodes, one row per node.
struct PatchState {
  MatrixXcd data;  // empty for zero-length patches
  double tini = 0.0;
  double tcur = 0.0;
  long long block = 0;
  int b = 1;
  VectorXd gini;
  VectorXd gcur;
};

/// Advances every row of `patch.data` from patch.tcur to t with g linear between gcur and g.
void ode_advance(PatchState& patch, const Eigen::VectorXcd& lambdas, double t, const VectorXd& g);

struct Segment {
  enum class Kind { Ode, Direct, Diagonal };
  Kind kind;
  double a;
  double b;
  int level;  // 0 for direct segments
};

struct EngineConfig {
  double h_min = 1e-3;
  int B = 5;
  double horizon = 1.0;
  ContourConstants contour{};
  /// Store only k >= 0 and use conjugate symmetry.
  bool fold = true;
};

/// Weights of g_{n-1} and g_n in the last-interval contribution.
struct DiagonalWeights {
  double prev = 0.0;
  double next = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Evaluates u(t_n) = int_0^t_n f(t_n - s) g(s) ds for piecewise linear g on an
/// arbitrary increasing grid, with logarithmic memory.
///
/// Usage per step: u = history(t) + diagonal(t).prev * g_{n-1} + diagonal(t).next * g_n,
/// then commit(t, g_n). history and diagonal may be called repeatedly for trial times.
class FastConvolution {
 public:
  FastConvolution(SectorialTransform kernel, EngineConfig cfg, Eigen::Index dim);

  void start(const VectorXd& g0);
  VectorXd history(double t) const;
  DiagonalWeights diagonal(double t) const;
  void commit(double t, const VectorXd& g);
  /// history + diagonal + commit.
  VectorXd evaluate(double t, const VectorXd& g);
  /// The segments tiling [0, t] for the next step at t.
  std::vector<Segment> plan(double t) const;

  /// Coefficients of g(a) and g(b) in the contribution of the past subinterval [a, b] at time t.
  struct DirectWeights {
    double ga, gb;
  };
  DirectWeights direct_weights(double t, double a, double b) const;
  VectorXd direct_step(double t, double a, double b, const VectorXd& ga, const VectorXd& gb) const;

  const Counters& counters() const { return counters_; }
  const EngineConfig& config() const { return cfg_; }
  const SectorialTransform& kernel() const { return kernel_; }
  const Contour& contour(int level) const { return contours_.at(level - 1); }
  int levels() const { return static_cast<int>(contours_.size()); }
  Eigen::Index dim() const { return dim_; }
  double last_time() const { return tail_.back().t; }
  std::uint64_t stored_vectors() const;
  double lb(int level) const;
  double ub(int level) const;

 private:
  struct Sample {
    double t;
    VectorXd g;
  };
  struct Level {
    PatchState running;
    std::vector<PatchState> copies;
  };
  struct Selected {
    int level;
    const PatchState* patch;
  };

  double at_units(long long u) const { return static_cast<double>(u) * cfg_.h_min; }
  long long pow_B(int e) const { return powB_.at(e); }
  std::vector<Selected> select(const Decomposition& dec) const;
  void check_time(double t) const;
  int covering_level(double d) const;
  void snapshot(Level& lv);
  void commit_level(int l, double t, const VectorXd& g);
  VectorXd ode_contribution(int l, const PatchState& p, double t) const;

  SectorialTransform kernel_;
  EngineConfig cfg_;
  Eigen::Index dim_;
  std::vector<Contour> contours_;
  std::vector<Eigen::VectorXcd> bank_nodes_;   // per level, rows of PatchState::data
  std::vector<Eigen::VectorXcd> bank_coeffs_;  // w_k F_k, doubled for folded k > 0
  std::vector<long long> powB_;
  std::vector<Level> levels_;
  std::deque<Sample> tail_;
  bool started_ = false;
  mutable Counters counters_;
};

}  // namespace fastconv

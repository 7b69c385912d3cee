#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "fastconv/kernels.hpp"

namespace fastconv {

/// Shape of the hyperbola and the trapezoid step/scale constants.
/// d is carried for reference only.
struct ContourConstants {
  double a = 0.8;
  double d = 0.7;
  int K = 50;
  double C1 = 6.567;
  double C2 = 0.066;
};

/// Named presets: "abel" (K=50), "fracrd" (K=40), "visco" (K=35).
ContourConstants contour_preset(std::string_view name);

struct LevelPlan {
  int level = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double Lambda = 0.0;
  double tau = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Interval bounds lb/ub in units of h_min for mosaic level `level` >= 1.
long long level_lb_units(int level, int B);
long long level_ub_units(int level, int B);

LevelPlan plan_level(int level, double h_min, int B, const ContourConstants& consts, double sigma);
/// Plan for an arbitrary interval [t_lo, t_hi].
LevelPlan plan_interval(double t_lo, double t_hi, const ContourConstants& consts, double sigma);

enum class Transform { F, F1, F2 };

struct F12 {
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Truncated trapezoid rule on one hyperbola with cached F, F/s, F/s^2.
/// Node j of the arrays corresponds to k = j - K.
class Contour {
 public:
  Contour(const LevelPlan& plan, const ContourConstants& consts, const SectorialTransform& F);

  const LevelPlan& plan() const { return plan_; }
  int K() const { return K_; }
  std::span<const cplx> nodes() const { return nodes_; }
  std::span<const cplx> weights() const { return weights_; }
  std::span<const cplx> values(Transform which) const;
  /// Number of F evaluations made at construction.
  int evaluations() const { return static_cast<int>(nodes_.size()); }

  /// Real inverse using conjugate symmetry (k = 0 term plus twice the k > 0 terms).
  double invert(Transform which, double t) const;
  /// Full sum over k = -K..K.
  cplx invert_complex(Transform which, double t) const;
  F12 eval_f12(double t) const;

 private:
  LevelPlan plan_;
  int K_;
  std::vector<cplx> nodes_;
  std::vector<cplx> weights_;
  std::vector<cplx> F_, F1_, F2_;
};

}  // namespace fastconv

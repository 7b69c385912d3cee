#include "fastconv/contour.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fastconv/error.hpp"

namespace fastconv {

ContourConstants contour_preset(std::string_view name) {
  if (name == "abel") return {0.8, 0.7, 50, 6.567, 0.066};
  if (name == "fracrd") return {1.0, 0.5, 40, 6.036, 0.0739};
  if (name == "visco") return {0.8, 0.7, 35, 6.225, 0.097};
  throw ConfigError("unknown contour preset: " + std::string(name));
}

namespace {

long long geometric_sum(int upto, int B) {
  long long s = 0, p = 1;
  for (int k = 0; k <= upto; ++k) {
    s += p;
    p *= B;
  }
  return s;
}

void check_constants(const ContourConstants& c) {
  if (c.K < 1) throw ConfigError("contour: K must be >= 1");
  if (!(c.C1 > 0.0) || !(c.C2 > 0.0)) throw ConfigError("contour: C1 and C2 must be positive");
  if (!(c.a > 0.0 && c.a < std::numbers::pi / 2)) throw ConfigError("contour: a must lie in (0, pi/2)");
}

}  // namespace

long long level_lb_units(int level, int B) { return 1 + (level >= 2 ? geometric_sum(level - 2, B) : 0); }
long long level_ub_units(int level, int B) { return 1 + geometric_sum(level, B); }

LevelPlan plan_interval(double t_lo, double t_hi, const ContourConstants& consts, double sigma) {
  check_constants(consts);
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw ConfigError("contour: need 0 < t_lo < t_hi");
  LevelPlan p;
  p.t_lo = t_lo;
  p.t_hi = t_hi;
  p.Lambda = t_hi / t_lo;
  p.tau = consts.C1 / consts.K;
  p.mu = consts.C2 * consts.K / t_hi;
  p.sigma = sigma;
  return p;
}

LevelPlan plan_level(int level, double h_min, int B, const ContourConstants& consts, double sigma) {
  if (level < 1) throw ConfigError("plan_level: level must be >= 1");
  if (B < 2) throw ConfigError("plan_level: B must be >= 2");
  if (!(h_min > 0.0)) throw ConfigError("plan_level: h_min must be positive");
  LevelPlan p = plan_interval(h_min * static_cast<double>(level_lb_units(level, B)),
                              h_min * static_cast<double>(level_ub_units(level, B)), consts, sigma);
  p.level = level;
  return p;
}

Contour::Contour(const LevelPlan& plan, const ContourConstants& consts, const SectorialTransform& F)
    : plan_(plan), K_(consts.K) {
  check_constants(consts);
  if (consts.a >= std::numbers::pi / 2 - F.phi)
    throw ConfigError("contour: a must be smaller than pi/2 - phi of kernel " + F.name);
  const int n = 2 * K_ + 1;
  nodes_.resize(n);
  weights_.resize(n);
  F_.resize(n);
  F1_.resize(n);
  F2_.resize(n);
  const double sector = std::numbers::pi - F.phi;
  for (int j = 0; j < n; ++j) {
    const double x = (j - K_) * plan.tau;
    const cplx arg(consts.a, x);
    const cplx lam = plan.mu * (1.0 - std::sin(arg)) + plan.sigma;
    if (std::abs(std::arg(lam - F.sigma)) >= sector)
      throw ConfigError("contour: node outside the sector of kernel " + F.name);
    nodes_[j] = lam;
    // Orientation: Im(lambda) decreases with x, hence the sign.
    weights_[j] = plan.tau * plan.mu * std::cos(arg) / (2.0 * std::numbers::pi);
    F_[j] = F(lam);
    F1_[j] = F_[j] / lam;
    F2_[j] = F1_[j] / lam;
  }
}

std::span<const cplx> Contour::values(Transform which) const {
  switch (which) {
    case Transform::F: return F_;
    case Transform::F1: return F1_;
    case Transform::F2: return F2_;
  }
  return F_;
}

double Contour::invert(Transform which, double t) const {
  const auto v = values(which);
  double sum = (weights_[K_] * std::exp(t * nodes_[K_]) * v[K_]).real();
  double tail = 0.0;
  for (int j = K_ + 1; j < 2 * K_ + 1; ++j) tail += (weights_[j] * std::exp(t * nodes_[j]) * v[j]).real();
  return sum + 2.0 * tail;
}

cplx Contour::invert_complex(Transform which, double t) const {
  const auto v = values(which);
  cplx sum = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) sum += weights_[j] * std::exp(t * nodes_[j]) * v[j];
  return sum;
}

F12 Contour::eval_f12(double t) const {
  if (t == 0.0) return {};
  double f1 = (weights_[K_] * std::exp(t * nodes_[K_]) * F1_[K_]).real();
  double f2 = (weights_[K_] * std::exp(t * nodes_[K_]) * F2_[K_]).real();
  double s1 = 0.0, s2 = 0.0;
  for (int j = K_ + 1; j < 2 * K_ + 1; ++j) {
    const cplx we = weights_[j] * std::exp(t * nodes_[j]);
    s1 += (we * F1_[j]).real();
    s2 += (we * F2_[j]).real();
  }
  return {f1 + 2.0 * s1, f2 + 2.0 * s2};
}

}  // namespace fastconv

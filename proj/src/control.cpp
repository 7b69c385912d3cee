#include "fastconv/control.hpp"

#include <algorithm>
#include <cmath>

#include "fastconv/contour.hpp"
#include "fastconv/error.hpp"

namespace fastconv {

void validate(const ControllerConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw ConfigError("controller: Tol must be positive");
  if (!(cfg.C > 0.0)) throw ConfigError("controller: C must be positive");
  if (!(cfg.h_min_guard > 0.0) || !(cfg.h0 >= cfg.h_min_guard))
    throw ConfigError("controller: need h0 >= h_min_guard > 0");
  if (!(cfg.grow >= 1.0) || !(cfg.shrink > 0.0 && cfg.shrink <= 1.0))
    throw ConfigError("controller: invalid clamp factors");
}

double kernel_constant(const SectorialTransform& F, double T) {
  if (F.moment_estimate) return F.moment_estimate(T) / 8.0;
  const ContourConstants c = contour_preset("abel");
  const Contour ct(plan_interval(0.25 * T, T, c, F.sigma), c, F);
  return T * std::abs(ct.invert(Transform::F, 0.5 * T)) / 8.0;
}

double propose_step(const ControllerConfig& cfg, double h_n, double gamma) {
  const double hi = cfg.grow * h_n, lo = cfg.shrink * h_n;
  if (!(gamma > 0.0)) return hi;
  return std::min(hi, std::max(lo, std::sqrt(0.8 * cfg.tol / (cfg.C * gamma))));
}

StepDecision accept_step(const ControllerConfig& cfg, double h_prop, double gamma_next) {
  if (cfg.C * h_prop * h_prop * gamma_next <= cfg.tol) return {true, h_prop};
  const double h = std::max(cfg.shrink * h_prop, std::sqrt(0.8 * cfg.tol / (cfg.C * gamma_next)));
  if (h < cfg.h_min_guard) throw NumericalFailure("controller: step size fell below h_min_guard");
  return {false, h};
}

double second_difference_norm(double t0, double t1, double t2, const Eigen::VectorXd& g0,
                              const Eigen::VectorXd& g1, const Eigen::VectorXd& g2) {
  const Eigen::VectorXd d01 = (g1 - g0) / (t1 - t0);
  const Eigen::VectorXd d12 = (g2 - g1) / (t2 - t1);
  return 2.0 * ((d12 - d01) / (t2 - t0)).lpNorm<Eigen::Infinity>();
}

double first_difference_norm(double t0, double t1, const Eigen::VectorXd& g0, const Eigen::VectorXd& g1) {
  return ((g1 - g0) / (t1 - t0)).lpNorm<Eigen::Infinity>();
}

MonitorTerms monitor_terms(const LinearApply& M_inv, const LinearApply& A, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& c, const Eigen::VectorXd& cdot,
                           const Eigen::VectorXd& cddot) {
  const Eigen::VectorXd r1 = A(M_inv(v)) - cdot;
  const Eigen::VectorXd y1 = M_inv(r1);
  const Eigen::VectorXd q = M_inv(A(u) - c);
  MonitorTerms m;
  m.sigma_tilde = r1.dot(y1) + q.dot(A(q));
  if (!(m.sigma_tilde > 0.0)) throw NumericalFailure("controller: sigma_tilde must be positive");
  m.G = -(2.0 * y1.dot(cddot)) / (4.0 * m.sigma_tilde);
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> c_derivatives(const IntegratorState& s) {
  const auto& [c0, c1, c2] = s.c_hist;
  const auto& [t0, t1, t2] = s.t_hist;
  const Eigen::VectorXd d01 = (c0 - c1) / (t0 - t1);
  const Eigen::VectorXd d12 = (c1 - c2) / (t1 - t2);
  return {d01, 2.0 * (d01 - d12) / (t0 - t2)};
}

IntegratorState integrator_init(double eps, const LinearApply& M_inv, const LinearApply& A,
                                const Eigen::VectorXd& u0, const Eigen::VectorXd& v0, const Eigen::VectorXd& c0,
                                double t0) {
  if (!(eps > 0.0)) throw ConfigError("controller: eps must be positive");
  IntegratorState s;
  s.eps = eps;
  s.c_hist = {c0, c0, c0};
  s.t_hist = {t0, t0 - 1.0, t0 - 2.0};
  const auto [cd, cdd] = c_derivatives(s);
  const MonitorTerms m = monitor_terms(M_inv, A, u0, v0, c0, cd, cdd);
  s.z = std::pow(m.sigma_tilde, 0.25) - eps * m.G / 2.0;
  if (!(s.z > 0.0)) throw NumericalFailure("controller: nonpositive step density");
  return s;
}

double integrating_step(IntegratorState& s, const LinearApply& M_inv, const LinearApply& A,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const auto [cd, cdd] = c_derivatives(s);
  const MonitorTerms m = monitor_terms(M_inv, A, u, v, s.c_hist[0], cd, cdd);
  s.z += s.eps * m.G;
  if (!(s.z > 0.0)) throw NumericalFailure("controller: nonpositive step density");
  return s.eps / s.z;
}

void push_c(IntegratorState& s, double t, const Eigen::VectorXd& c) {
  s.c_hist = {c, s.c_hist[0], s.c_hist[1]};
  s.t_hist = {t, s.t_hist[0], s.t_hist[1]};
}

}  // namespace fastconv

#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "fastconv/kernels.hpp"

namespace fastconv {

struct ControllerConfig {
  double tol = 1e-6;
  double C = 1.0;
  double h0 = 1e-4;
  double h_min_guard = 1e-12;
  double grow = 2.0;
  double shrink = 0.5;
  int max_retries = 25;
};

void validate(const ControllerConfig& cfg);

/// C = integral of |f| over [0, T] divided by 8; falls back to T |f(T/2)| / 8.
double kernel_constant(const SectorialTransform& F, double T);

/// h = min(grow h_n, max(shrink h_n, sqrt(0.8 Tol / (C gamma)))). gamma is the
/// second-derivative estimate (or the first-derivative one for the first-difference variant).
double propose_step(const ControllerConfig& cfg, double h_n, double gamma);
inline double propose_step_second_diff(const ControllerConfig& cfg, double h_n, double gamma2) {
  return propose_step(cfg, h_n, gamma2);
}
inline double propose_step_first_diff(const ControllerConfig& cfg, double h_n, double gamma1) {
  return propose_step(cfg, h_n, gamma1);
}

struct StepDecision {
  bool accept = false;
  double h = 0.0;  // proposal for the retry when rejected
};

/// Accepts when C h^2 gamma <= Tol. A rejected step gets a new proposal from the same
/// formula, at least half of h_prop. Throws NumericalFailure below h_min_guard.
StepDecision accept_step(const ControllerConfig& cfg, double h_prop, double gamma_next);

/// 2 g[t0, t1, t2] in the max norm.
double second_difference_norm(double t0, double t1, double t2, const Eigen::VectorXd& g0,
                              const Eigen::VectorXd& g1, const Eigen::VectorXd& g2);
/// |g1 - g0| / (t1 - t0) in the max norm.
double first_difference_norm(double t0, double t1, const Eigen::VectorXd& g0, const Eigen::VectorXd& g1);

/// Step-density state of the integrating controller for second-order systems
/// M u'' = -A u + c(t) with momenta v = M u'.
struct IntegratorState {
  double z = 0.0;
  double eps = 1e-4;
  std::array<Eigen::VectorXd, 3> c_hist;  // c_n, c_{n-1}, c_{n-2}
  std::array<double, 3> t_hist{};
};

using LinearApply = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MonitorTerms {
  double sigma_tilde = 0.0;
  double G = 0.0;
};

/// sigma_tilde and G at (u, v) for given derivative estimates of c.
MonitorTerms monitor_terms(const LinearApply& M_inv, const LinearApply& A, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& c, const Eigen::VectorXd& cdot,
                           const Eigen::VectorXd& cddot);

/// Divided-difference estimates of c' and c'' at t_n from c_hist.
std::pair<Eigen::VectorXd, Eigen::VectorXd> c_derivatives(const IntegratorState& s);

/// z_{-1/2} = sigma_tilde^{1/4} - eps G / 2 with c_{-1} = c_{-2} = c0.
IntegratorState integrator_init(double eps, const LinearApply& M_inv, const LinearApply& A,
                                const Eigen::VectorXd& u0, const Eigen::VectorXd& v0, const Eigen::VectorXd& c0,
                                double t0);

/// z <- z + eps G(u, v, t_n); returns h = eps / z. Throws NumericalFailure if z <= 0.
double integrating_step(IntegratorState& s, const LinearApply& M_inv, const LinearApply& A,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Shifts c_{n+1} at t_{n+1} into the history.
void push_c(IntegratorState& s, double t, const Eigen::VectorXd& c);

}  // namespace fastconv

#include "fastconv/abel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fastconv/control.hpp"
#include "fastconv/error.hpp"

namespace fastconv {

cplx abel_forcing(double t) { return std::pow(std::numbers::pi, -0.25) / std::sqrt(cplx(1.0, 2.0 * t)); }

namespace {

Eigen::VectorXd pack(cplx v) { return Eigen::Vector2d(v.real(), v.imag()); }
cplx unpack(const Eigen::VectorXd& v) { return {v[0], v[1]}; }

struct Nonlinearity {
  double sigma;
  cplx operator()(cplx z) const { return std::pow(std::abs(z), 2.0 * sigma) * z; }
};

/// Solves z + c0 + c1 g(z) = rhs by damped Newton with a finite-difference Jacobian,
/// falling back to fixed-point iteration when Newton stalls.
cplx solve_implicit(const Nonlinearity& g, cplx c0, cplx c1, cplx rhs, cplx guess, double tol) {
  auto residual = [&](cplx z) { return z + c0 + c1 * g(z) - rhs; };
  cplx z = guess;
  cplx r = residual(z);
  for (int it = 0; it < 50; ++it) {
    const double d = 1e-7 * std::max(1.0, std::abs(z));
    const cplx rx = (residual(z + cplx(d, 0.0)) - r) / d;
    const cplx ry = (residual(z + cplx(0.0, d)) - r) / d;
    Eigen::Matrix2d J;
    J << rx.real(), ry.real(), rx.imag(), ry.imag();
    const Eigen::Vector2d step = J.fullPivLu().solve(Eigen::Vector2d(-r.real(), -r.imag()));
    if (!step.allFinite()) break;
    double lambda = 1.0;
    cplx trial = z + lambda * cplx(step[0], step[1]);
    cplx rt = residual(trial);
    while (std::abs(rt) > std::abs(r) && lambda > 1e-4) {
      lambda *= 0.5;
      trial = z + lambda * cplx(step[0], step[1]);
      rt = residual(trial);
    }
    const double moved = lambda * std::hypot(step[0], step[1]);
    z = trial;
    r = rt;
    if (moved <= tol * std::max(1.0, std::abs(z))) return z;
  }
  z = guess;
  for (int it = 0; it < 500; ++it) {
    const cplx next = rhs - c0 - c1 * g(z);
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
    const double moved = std::abs(next - z);
    z = next;
    if (moved <= tol * std::max(1.0, std::abs(z))) return z;
  }
  throw NumericalFailure("abel: nonlinear solve did not converge");
}

}  // namespace

Trajectory abel_solve(const AbelProblem& p) {
  if (!(p.t_end > 0.0) || !(p.tol > 0.0) || !(p.h0 > 0.0) || !(p.h_min > 0.0) || p.h0 < p.h_min)
    throw ConfigError("abel: invalid problem parameters");
  const SectorialTransform kernel = power_kernel(0.5);
  const cplx pref = p.gamma * std::polar(1.0, std::numbers::pi / 4) / 2.0;
  ControllerConfig ctl;
  ctl.tol = p.tol;
  ctl.C = std::abs(pref) * kernel_constant(kernel, p.t_end);
  if (!(ctl.C > 0.0)) ctl.C = 1.0;
  ctl.h0 = p.h0;
  ctl.h_min_guard = p.h_min;
  EngineConfig ecfg{p.h_min, p.B, p.t_end, p.contour, true};
  FastConvolution engine(kernel, ecfg, 2);
  const Nonlinearity g{p.sigma_exp};

  Trajectory tr;
  tr.columns = {"t", "h", "re", "im", "abs", "gamma2", "rejects"};
  cplx z = p.forcing(0.0);
  cplx gz = g(z);
  engine.start(pack(gz));
  tr.add({0.0, 0.0, z.real(), z.imag(), std::abs(z), 0.0, 0.0});

  double t = 0.0, h_last = p.h0, gamma_last = 0.0;
  std::vector<double> ts{0.0};
  std::vector<cplx> gs{gz};
  const double newton_tol = 0.01 * p.tol;
  try {
    while (t < p.t_end) {
      const std::size_t n = ts.size() - 1;
      double h = n < 2 ? p.h0 : propose_step_second_diff(ctl, h_last, gamma_last);
      if (p.t_end - (t + h) < 0.25 * h) h = p.t_end - t;
      int rejects = 0;
      cplx z_new, g_new;
      double gamma_new = 0.0;
      for (;;) {
        h = std::min(h, p.t_end - t);
        const double tn = t + h;
        const cplx H = unpack(engine.history(tn));
        const DiagonalWeights w = engine.diagonal(tn);
        const cplx c0 = pref * (H + w.prev * gs.back());
        const cplx c1 = pref * w.next;
        z_new = solve_implicit(g, c0, c1, p.forcing(tn), z, newton_tol);
        g_new = g(z_new);
        if (n < 1) break;
        const Eigen::VectorXd g0 = pack(gs[n - 1]), g1 = pack(gs[n]), g2 = pack(g_new);
        gamma_new = second_difference_norm(ts[n - 1], t, tn, g0, g1, g2);
        if (n < 2) break;
        const StepDecision d = accept_step(ctl, h, gamma_new);
        if (d.accept) break;
        if (++rejects > ctl.max_retries) throw NumericalFailure("abel: too many rejected steps");
        h = d.h;
      }
      t += h;
      engine.commit(t, pack(g_new));
      z = z_new;
      ts.push_back(t);
      gs.push_back(g_new);
      h_last = h;
      gamma_last = gamma_new;
      tr.add({t, h, z.real(), z.imag(), std::abs(z), gamma_new, static_cast<double>(rejects)});
      if (std::abs(z) > p.blowup_threshold) {
        tr.status = "blowup";
        break;
      }
      if (p.max_steps > 0 && ts.size() > p.max_steps) {
        tr.status = "step_limit";
        break;
      }
    }
  } catch (const NumericalFailure& e) {
    tr.status = "failed";
    tr.message = e.what();
  } catch (const StepScaleError& e) {
    tr.status = "failed";
    tr.message = e.what();
  }
  tr.final_state["z"] = pack(z);
  tr.counters = engine.counters();
  return tr;
}

}  // namespace fastconv

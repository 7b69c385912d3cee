#include <cmath>

#include "doctest.h"
#include "fastconv/control.hpp"
#include "fastconv/error.hpp"

using namespace fastconv;
using doctest::Approx;
using Eigen::VectorXd;

TEST_CASE("second-difference proposal") {
  ControllerConfig c;
  c.C = 1.0;
  c.tol = 1e-3;
  CHECK(propose_step_second_diff(c, 1.0, 0.0) == 2.0);
  CHECK(propose_step_second_diff(c, 1.0, 0.8) == 0.5);
  c.tol = 0.8;
  CHECK(propose_step_second_diff(c, 1.0, 1.0) == Approx(0.8).epsilon(1e-15));
}

TEST_CASE("first-difference proposal") {
  ControllerConfig c;
  c.C = 1.0;
  c.tol = 0.8;
  CHECK(propose_step_first_diff(c, 1.0, 0.0) == 2.0);
  CHECK(propose_step_first_diff(c, 1.0, 1.0) == Approx(0.8).epsilon(1e-15));
  double h = 1e-3;
  for (int i = 0; i < 10; ++i) {
    const double next = propose_step_first_diff(c, h, first_difference_norm(0.0, h, VectorXd::Ones(3), VectorXd::Ones(3)));
    CHECK(next == 2 * h);
    h = next;
  }
}

TEST_CASE("acceptance test") {
  ControllerConfig c;
  c.C = 2.0;
  c.tol = 0.5;
  // C h^2 gamma = Tol exactly.
  CHECK(accept_step(c, 0.5, 1.0).accept);
  CHECK_FALSE(accept_step(c, 0.5, 1.0 + 1e-12).accept);

  // The second difference doubles on the trial: one rejection, then the retry passes.
  c.C = 1.0;
  c.tol = 1e-4;
  const double h = propose_step(c, 0.01, 1.0);
  CHECK(h == Approx(std::sqrt(0.8e-4)).epsilon(1e-14));
  const StepDecision first = accept_step(c, h, 2.0);
  CHECK_FALSE(first.accept);
  CHECK(first.h < h);
  CHECK(accept_step(c, first.h, 2.0).accept);
}

TEST_CASE("rejections below the guard fail") {
  ControllerConfig c;
  c.C = 1.0;
  c.tol = 1e-10;
  c.h_min_guard = 1e-6;
  c.h0 = 1e-3;
  CHECK_THROWS_AS(accept_step(c, 1.5e-6, 1e6), NumericalFailure);
}

TEST_CASE("config validation") {
  ControllerConfig c;
  validate(c);
  ControllerConfig bad = c;
  bad.tol = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.C = -1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.h0 = 1e-15;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("difference norms") {
  VectorXd a(2), b(2), d(2);
  a << 0.0, 1.0;
  b << 1.0, 1.0;
  d << 4.0, 1.0;
  CHECK(first_difference_norm(0.0, 0.5, a, b) == 2.0);
  // g = t^2 in the first component: 2 g[t0, t1, t2] = 2.
  CHECK(second_difference_norm(0.0, 1.0, 2.0, a, b, d) == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("kernel constant") {
  CHECK(kernel_constant(power_kernel(0.5), 4.0) == Approx(4.0 / std::sqrt(M_PI) / 8.0).epsilon(1e-14));
  const double cm = kernel_constant(mittag_leffler_kernel(0.5), 10.0);
  CHECK(cm > 0.0);
  CHECK(cm <= 1.0 / 8.0);

  UserKernelSpec spec;
  spec.eval = [](cplx s) { return 1.0 / (s + 1.0); };
  spec.phi = 0.1;
  spec.nu = 1.0;
  spec.M = 1.0 / std::sin(0.1);
  // Fallback T |f(T/2)| / 8 with f = e^-t.
  CHECK(kernel_constant(user_kernel(spec), 2.0) == Approx(2.0 * std::exp(-1.0) / 8.0).epsilon(1e-8));
}

TEST_CASE("integrating controller on a scalar oscillator") {
  const LinearApply id = [](const VectorXd& x) -> VectorXd { return x; };
  const VectorXd u = VectorXd::Ones(1), v = VectorXd::Zero(1), c = VectorXd::Zero(1);
  const MonitorTerms m = monitor_terms(id, id, u, v, c, VectorXd::Zero(1), VectorXd::Zero(1));
  CHECK(m.sigma_tilde == Approx(1.0).epsilon(1e-15));
  CHECK(m.G == 0.0);

  const double eps = 1e-3;
  IntegratorState s = integrator_init(eps, id, id, u, v, c, 0.0);
  CHECK(s.z == Approx(1.0).epsilon(1e-15));
  CHECK(integrating_step(s, id, id, u, v) == Approx(eps).epsilon(1e-15));
}

TEST_CASE("constant forcing keeps the step fixed") {
  const LinearApply id = [](const VectorXd& x) -> VectorXd { return x; };
  const LinearApply two = [](const VectorXd& x) -> VectorXd { return 2.0 * x; };
  VectorXd u(2), v(2), c(2);
  u << 0.3, -1.0;
  v << 0.5, 0.2;
  c << 1.0, 2.0;
  IntegratorState s = integrator_init(1e-2, id, two, u, v, c, 0.0);
  const double h0 = integrating_step(s, id, two, u, v);
  double t = h0;
  for (int i = 0; i < 5; ++i) {
    push_c(s, t, c);
    const auto [cd, cdd] = c_derivatives(s);
    CHECK(cd.norm() == 0.0);
    CHECK(cdd.norm() == 0.0);
    CHECK(monitor_terms(id, two, u, v, c, cd, cdd).G == 0.0);
    CHECK(integrating_step(s, id, two, u, v) == h0);
    t += h0;
  }
}

TEST_CASE("non-positive step density fails") {
  const LinearApply id = [](const VectorXd& x) -> VectorXd { return x; };
  IntegratorState s;
  s.z = -1.0;
  s.eps = 1e-3;
  for (auto& c : s.c_hist) c = VectorXd::Zero(1);
  s.t_hist = {0.0, -1.0, -2.0};
  CHECK_THROWS_AS(integrating_step(s, id, id, VectorXd::Ones(1), VectorXd::Zero(1)), NumericalFailure);
}

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fastconv/engine.hpp"
#include "fastconv/oracle.hpp"

using namespace fastconv;
using doctest::Approx;

TEST_CASE("zero samples") {
  const std::vector<double> grid{0.0, 0.1, 0.5, 1.0};
  const std::vector<double> g(grid.size(), 0.0);
  for (double u : oracle_convolve(power_kernel(0.5), grid, g)) CHECK(u == 0.0);
}

TEST_CASE("constant samples reproduce the analytic convolution") {
  const std::vector<double> grid{0.0, 0.05, 0.3, 0.31, 0.7, 1.0};
  const std::vector<double> g(grid.size(), 1.0);
  const std::vector<double> u = oracle_convolve(power_kernel(0.5), grid, g);
  CHECK(u.front() == 0.0);
  CHECK(u.back() == Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
  CHECK(u.back() == Approx(1.128379).epsilon(1e-6));
}

TEST_CASE("unit kernel gives the composite trapezoid rule") {
  const std::vector<double> grid{0.0, 0.2, 0.25, 0.9, 1.4, 2.0};
  std::vector<double> g;
  for (double t : grid) g.push_back(std::exp(t) - 3 * t);
  const std::vector<double> u = oracle_convolve(power_kernel(1.0), grid, g);
  double trap = 0.0;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    trap += 0.5 * (grid[n] - grid[n - 1]) * (g[n] + g[n - 1]);
    CHECK(u[n] == Approx(trap).epsilon(1e-13));
  }
}

TEST_CASE("two-point grid equals one direct step") {
  const std::vector<double> grid{0.0, 0.4};
  const std::vector<double> g{1.5, -0.5};
  const std::vector<double> u = oracle_convolve(power_kernel(0.5), grid, g);
  FastConvolution e(power_kernel(0.5), EngineConfig{0.1, 5, 1.0, contour_preset("abel"), true}, 1);
  e.start(Eigen::VectorXd::Constant(1, g[0]));
  const double d = e.direct_step(0.4, 0.0, 0.4, Eigen::VectorXd::Constant(1, g[0]), Eigen::VectorXd::Constant(1, g[1]))[0];
  CHECK(u[1] == Approx(d).epsilon(1e-9));
}

TEST_CASE("inversion fallback for kernels without closed forms") {
  UserKernelSpec spec;
  spec.eval = [](cplx s) { return 1.0 / (s + 1.0); };
  spec.phi = 0.1;
  spec.nu = 1.0;
  spec.M = 1.0 / std::sin(0.1);
  const SectorialTransform F = user_kernel(spec);
  // f = e^-t, so f1 = 1 - e^-t and f2 = t - 1 + e^-t.
  auto f1 = [](double t) { return 1.0 - std::exp(-t); };
  auto f2 = [](double t) { return t - 1.0 + std::exp(-t); };
  const std::vector<double> grid{0.0, 0.1, 0.35, 1.0, 1.2, 3.0};
  std::vector<double> g;
  for (double t : grid) g.push_back(std::sin(t) + 0.3);
  const std::vector<double> u = oracle_convolve(F, grid, g);
  for (std::size_t n = 1; n < grid.size(); ++n) {
    double exact = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = grid[n] - grid[j], b = grid[n] - grid[j + 1], h = grid[j + 1] - grid[j];
      const double slope = (g[j + 1] - g[j]) / h;
      exact += f1(a) * g[j] + f2(a) * slope - (b > 0 ? f1(b) * g[j + 1] + f2(b) * slope : 0.0);
    }
    CHECK(u[n] == Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("vector overload matches the scalar one") {
  const std::vector<double> grid{0.0, 0.3, 0.5, 1.1};
  std::vector<double> g{0.2, -1.0, 0.7, 2.0};
  std::vector<Eigen::VectorXd> gv;
  for (double x : g) gv.push_back(Eigen::Vector2d(x, -2 * x));
  const auto us = oracle_convolve(mittag_leffler_kernel(0.5), grid, g);
  const auto uv = oracle_convolve(mittag_leffler_kernel(0.5), grid, gv);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    CHECK(uv[n][0] == Approx(us[n]).epsilon(1e-15));
    CHECK(uv[n][1] == Approx(-2 * us[n]).epsilon(1e-15));
  }
}

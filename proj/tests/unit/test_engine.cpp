#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "fastconv/engine.hpp"
#include "fastconv/error.hpp"
#include "fastconv/oracle.hpp"

using namespace fastconv;
using doctest::Approx;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

// Steps h_min * e^U with U uniform on [0, log(spread)].
std::vector<double> wild_grid(std::mt19937_64& rng, double h_min, double spread, double T) {
  std::uniform_real_distribution<double> u(0.0, std::log(spread));
  std::vector<double> grid{0.0};
  while (true) {
    const double next = grid.back() + h_min * std::exp(u(rng));
    if (next > T) break;
    grid.push_back(next);
  }
  return grid;
}

EngineConfig config(double h_min, int B, double horizon, const char* preset = "fracrd") {
  return EngineConfig{h_min, B, horizon, contour_preset(preset), true};
}

}  // namespace

TEST_CASE("decompose examples") {
  Decomposition d = decompose(1.0, 0.01, 5);
  CHECK(d.L == 3);
  CHECK(d.digits == std::vector<int>{3, 4, 3});

  d = decompose(3.45, 1.0, 3);
  CHECK(d.L == 1);
  CHECK(d.digits == std::vector<int>{2});

  d = decompose(3.0, 1.0, 3);
  CHECK(d.L == 1);
  CHECK(d.digits == std::vector<int>{1});

  CHECK(decompose(2.0, 1.0, 3).L == 0);
  CHECK(decompose(0.5, 1.0, 3).L == 0);
}

TEST_CASE("decompose is exact and minimal") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> units(3, 2000000);
  for (int B : {2, 3, 5, 7}) {
    for (int trial = 0; trial < 500; ++trial) {
      const long long c = units(rng);
      const Decomposition d = decompose(static_cast<double>(c), 1.0, B);
      long long sum = 2;
      long long p = 1;
      for (int b : d.digits) {
        CHECK(b >= 1);
        CHECK(b <= B);
        sum += b * p;
        p *= B;
      }
      CHECK(sum == c);
      // With one level fewer the largest representable count is 2 + B (B^(L-1) - 1)/(B - 1).
      long long shorter = 2;
      long long q = 1;
      for (int l = 1; l < d.L; ++l, q *= B) shorter += B * q;
      CHECK(shorter < c);
    }
  }
}

TEST_CASE("ceil_units agrees with the multiplication used for patch times") {
  for (double h : {0.1, 0.01, 1e-3, 3e-7}) {
    for (double t : {0.3, 1.0, 2.7, 10.0}) {
      const long long c = ceil_units(t, h);
      CHECK(static_cast<double>(c) * h >= t);
      CHECK(static_cast<double>(c - 1) * h < t);
    }
  }
}

TEST_CASE("exponential Euler") {
  CHECK(exp_euler_step(-1.0, 1.0, 1.0, 0.0, 0.0).real() == Approx(std::exp(-1.0)).epsilon(1e-15));
  const cplx lam(-0.7, 3.0);
  const cplx c(2.0, -1.0);
  CHECK(std::abs(exp_euler_step(lam, 0.4, 0.0, c, c) - c * (std::exp(lam * 0.4) - 1.0) / lam) < 1e-15);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-50.0, -1e-6), im(-50.0, 50.0), dt(1e-6, 2.0), g(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const cplx l(re(rng), im(rng));
    const double h = dt(rng);
    const cplx y0(g(rng), g(rng)), g0(g(rng), g(rng)), g1(g(rng), g(rng));
    const cplx e = std::exp(l * h);
    const cplx exact = e * y0 + g0 * (e - 1.0) / l + ((g1 - g0) / h) * (e - 1.0 - l * h) / (l * l);
    CHECK(std::abs(exp_euler_step(l, h, y0, g0, g1) - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("phi functions against their power series") {
  auto series = [](std::complex<long double> z, int shift) {
    std::complex<long double> sum = 0.0L, term = 1.0L;
    for (int k = 0; k < 40; ++k) {
      long double denom = 1.0L;
      for (int m = 1; m <= k + shift; ++m) denom *= m;
      sum += term / denom;
      term *= z;
    }
    return cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
  };
  for (double r : {1e-12, 1e-6, 0.1, 0.49, 0.51, 0.9}) {
    const cplx z(-r, 0.3 * r);
    const std::complex<long double> zl(z.real(), z.imag());
    CHECK(std::abs(phi1(z) - series(zl, 1)) <= 1e-15);
    CHECK(std::abs(phi2(z) - series(zl, 2)) <= 1e-15);
  }
  CHECK(std::abs(phi1(0.0) - 1.0) < 1e-16);
  CHECK(std::abs(phi2(0.0) - 0.5) < 1e-16);
}

TEST_CASE("ode_advance") {
  PatchState p;
  p.data = MatrixXcd::Ones(1, 1);
  p.tini = p.tcur = 0.0;
  p.gini = p.gcur = scalar(0.0);
  Eigen::VectorXcd lambdas = Eigen::VectorXcd::Constant(1, -1.0);
  ode_advance(p, lambdas, 1.0, scalar(0.0));
  CHECK(p.data(0, 0).real() == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(p.tcur == 1.0);
  CHECK_THROWS_AS(ode_advance(p, lambdas, 1.0, scalar(0.0)), OrderingError);
}

TEST_CASE("direct steps") {
  {
    FastConvolution e(power_kernel(1.0), config(0.01, 5, 4.0, "abel"), 1);
    e.start(scalar(0.0));
    const double h = 0.37;
    const VectorXd v = e.direct_step(1.0, 1.0 - h, 1.0, scalar(2.0), scalar(5.0));
    CHECK(v[0] == Approx(h * (2.0 + 5.0) / 2).epsilon(1e-8));
    CHECK(e.direct_step(1.0, 0.2, 0.5, scalar(0.0), scalar(0.0))[0] == 0.0);
  }
  {
    FastConvolution e(power_kernel(0.5), config(0.1, 5, 4.0, "abel"), 1);
    e.start(scalar(0.0));
    CHECK(e.direct_step(2.0, 0.0, 1.0, scalar(0.0), scalar(1.0))[0] == Approx(0.247060216981787).epsilon(1e-9));
  }
}

TEST_CASE("constant g is integrated exactly") {
  std::mt19937_64 rng(5);
  const double h_min = 1e-3;
  const std::vector<double> grid = wild_grid(rng, h_min, 40.0, 3.0);
  FastConvolution e(power_kernel(0.5), config(h_min, 5, 3.0, "abel"), 1);
  e.start(scalar(1.0));
  double worst = 0.0;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    const double u = e.evaluate(grid[n], scalar(1.0))[0];
    worst = std::max(worst, std::abs(u - 2.0 * std::sqrt(grid[n] / std::numbers::pi)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("zero input gives zero output") {
  FastConvolution e(mittag_leffler_kernel(0.5), config(0.01, 3, 2.0), 2);
  e.start(VectorXd::Zero(2));
  for (double t = 0.013; t < 2.0; t += 0.013) CHECK(e.evaluate(t, VectorXd::Zero(2)).norm() == 0.0);
}

TEST_CASE("plan structure on an irregular grid") {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.211 * i);
  for (double t : {3.14, 3.24, 3.35}) grid.push_back(t);
  FastConvolution e(power_kernel(0.5), config(0.09, 3, 4.0), 1);
  e.start(scalar(1.0));
  for (std::size_t n = 1; n < grid.size(); ++n) e.evaluate(grid[n], scalar(1.0));
  const std::vector<Segment> plan = e.plan(3.45);
  REQUIRE(plan.size() >= 3);
  CHECK(plan[0].kind == Segment::Kind::Ode);
  CHECK(plan[0].level == 3);
  CHECK(plan[0].a == 0.0);
  CHECK(plan[0].b == Approx(2.11));
  CHECK(plan[1].kind == Segment::Kind::Direct);
  CHECK(plan[1].a == Approx(2.11));
  CHECK(plan[1].b == Approx(3.14));
  CHECK(plan.back().kind == Segment::Kind::Diagonal);
  CHECK(plan.back().a == Approx(3.35));
  CHECK(plan.back().b == 3.45);
}

TEST_CASE("first step is a single diagonal segment") {
  FastConvolution e(power_kernel(0.5), config(0.01, 5, 1.0), 1);
  e.start(scalar(1.0));
  const std::vector<Segment> plan = e.plan(0.013);
  REQUIRE(plan.size() == 1);
  CHECK(plan[0].kind == Segment::Kind::Diagonal);
}

TEST_CASE("mosaic tiling and interval membership on random grids") {
  std::mt19937_64 rng(2024);
  for (int B : {2, 3, 5}) {
    for (int trial = 0; trial < 40; ++trial) {
      const double h_min = 1e-3;
      const std::vector<double> grid = wild_grid(rng, h_min, 60.0, 2.0);
      FastConvolution e(power_kernel(0.5), config(h_min, B, 2.0), 1);
      e.start(scalar(0.0));
      for (std::size_t n = 1; n < grid.size(); ++n) {
        const double t = grid[n];
        const std::vector<Segment> plan = e.plan(t);
        REQUIRE(!plan.empty());
        CHECK(plan.front().a == 0.0);
        CHECK(plan.back().b == t);
        CHECK(plan.back().kind == Segment::Kind::Diagonal);
        CHECK(plan.back().a == grid[n - 1]);
        for (std::size_t i = 0; i < plan.size(); ++i) {
          CHECK(plan[i].a < plan[i].b);
          if (i > 0) CHECK(plan[i].a == plan[i - 1].b);
          if (plan[i].kind == Segment::Kind::Ode) {
            CHECK(t - plan[i].b >= e.lb(plan[i].level) * (1 - 1e-12));
            CHECK(t - plan[i].a <= e.ub(plan[i].level) * (1 + 1e-12));
          }
        }
        e.evaluate(t, scalar(std::sin(t)));
      }
    }
  }
}

TEST_CASE("obliviousness and memory bounds") {
  std::mt19937_64 rng(77);
  const double h_min = 1e-4;
  const std::vector<double> grid = wild_grid(rng, h_min, 30.0, 1.0);
  const EngineConfig cfg = config(h_min, 5, 1.0);
  FastConvolution e(power_kernel(0.5), cfg, 1);
  e.start(scalar(0.0));
  for (std::size_t n = 1; n < grid.size(); ++n) e.evaluate(grid[n], scalar(std::cos(grid[n])));
  const int L = e.levels();
  CHECK(L == decompose(1.0, h_min, 5).L);
  const Counters& c = e.counters();
  CHECK(c.g_reads_step_max <= static_cast<std::uint64_t>(2 * L + 3));
  CHECK(c.stored_vectors_peak <= static_cast<std::uint64_t>(4 * L * (2 * cfg.contour.K + 1)));
  CHECK(c.F_evaluations <= static_cast<std::uint64_t>(3 * (2 * cfg.contour.K + 1) * L));
  CHECK(c.direct_steps > 0);
  CHECK(c.ode_advances > 0);
}

TEST_CASE("evaluate is linear in g") {
  std::mt19937_64 rng(8);
  const double h_min = 1e-3;
  const std::vector<double> grid = wild_grid(rng, h_min, 20.0, 2.0);
  auto g1 = [](double t) { return std::sin(3 * t); };
  auto g2 = [](double t) { return t * t - 1.0; };
  FastConvolution a(power_kernel(0.4), config(h_min, 3, 2.0), 1), b = a, s = a;
  a.start(scalar(g1(0)));
  b.start(scalar(g2(0)));
  s.start(scalar(g1(0) + g2(0)));
  for (std::size_t n = 1; n < grid.size(); ++n) {
    const double t = grid[n];
    const double ua = a.evaluate(t, scalar(g1(t)))[0];
    const double ub = b.evaluate(t, scalar(g2(t)))[0];
    const double us = s.evaluate(t, scalar(g1(t) + g2(t)))[0];
    CHECK(std::abs(us - ua - ub) <= 1e-12 * std::max({1.0, std::abs(ua), std::abs(ub)}));
  }
}

TEST_CASE("folded bank matches the full bank") {
  std::mt19937_64 rng(9);
  const double h_min = 1e-3;
  const std::vector<double> grid = wild_grid(rng, h_min, 20.0, 1.5);
  EngineConfig full = config(h_min, 5, 1.5);
  full.fold = false;
  FastConvolution a(mittag_leffler_kernel(0.6), config(h_min, 5, 1.5), 1);
  FastConvolution b(mittag_leffler_kernel(0.6), full, 1);
  a.start(scalar(1.0));
  b.start(scalar(1.0));
  for (std::size_t n = 1; n < grid.size(); ++n) {
    const double g = std::exp(-grid[n]);
    const double ua = a.evaluate(grid[n], scalar(g))[0];
    const double ub = b.evaluate(grid[n], scalar(g))[0];
    CHECK(ua == Approx(ub).epsilon(1e-12));
  }
}

TEST_CASE("uniform grid agrees with the quadratic-cost sum") {
  const int N = 400;
  const double T = 2.0;
  std::vector<double> grid(N + 1), g(N + 1);
  for (int i = 0; i <= N; ++i) {
    grid[i] = T * i / N;
    g[i] = std::cos(2 * grid[i]);
  }
  const SectorialTransform F = power_kernel(0.7);
  const std::vector<double> ref = oracle_convolve(F, grid, g);
  FastConvolution e(F, config(T / N, 5, T), 1);
  e.start(scalar(g[0]));
  double dev = 0.0, scale = 0.0;
  for (int n = 1; n <= N; ++n) {
    dev = std::max(dev, std::abs(e.evaluate(grid[n], scalar(g[n]))[0] - ref[n]));
    scale = std::max(scale, std::abs(ref[n]));
  }
  CHECK(dev <= 1e-7 * scale);
}

TEST_CASE("vector-valued g is handled componentwise") {
  FastConvolution v(power_kernel(0.5), config(0.01, 5, 1.0), 2);
  FastConvolution s(power_kernel(0.5), config(0.01, 5, 1.0), 1);
  v.start(VectorXd::Zero(2));
  s.start(scalar(0.0));
  for (double t = 0.017; t <= 1.0; t += 0.017) {
    VectorXd g(2);
    g << std::sin(t), 2 * std::sin(t);
    const VectorXd u = v.evaluate(t, g);
    const double us = s.evaluate(t, scalar(std::sin(t)))[0];
    CHECK(u[0] == Approx(us).epsilon(1e-14));
    CHECK(u[1] == Approx(2 * us).epsilon(1e-14));
  }
}

TEST_CASE("engine errors") {
  FastConvolution e(power_kernel(0.5), config(0.01, 5, 1.0), 1);
  CHECK_THROWS_AS(e.evaluate(0.1, scalar(0.0)), Error);
  e.start(scalar(0.0));
  e.evaluate(0.1, scalar(0.0));
  CHECK_THROWS_AS(e.evaluate(0.1, scalar(0.0)), OrderingError);
  CHECK_THROWS_AS(e.evaluate(0.05, scalar(0.0)), OrderingError);
  CHECK_THROWS_AS(e.evaluate(0.105, scalar(0.0)), StepScaleError);
  CHECK_THROWS_AS(e.evaluate(0.2, VectorXd::Zero(3)), ConfigError);
  CHECK_THROWS_AS(FastConvolution(power_kernel(0.5), config(0.01, 1, 1.0), 1), ConfigError);
}

TEST_CASE("counters serialize to JSON") {
  Counters c;
  c.F_evaluations = 3;
  const std::string s = c.to_json();
  CHECK(s.find("\"F_evaluations\": 3") != std::string::npos);
  CHECK(s.find("stored_vectors_peak") != std::string::npos);
}

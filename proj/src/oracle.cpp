#include "fastconv/oracle.hpp"

#include <functional>

#include "fastconv/contour.hpp"
#include "fastconv/error.hpp"

namespace fastconv {

namespace {

// Reference inversion on [0.75t, 1.5t]; about 1e-15 relative for power kernels.
constexpr ContourConstants kReference{0.8, 0.7, 80, 5.25, 0.0814};

std::function<F12(double)> f12_source(const SectorialTransform& F) {
  if (F.has_closed_forms()) return [&F](double t) { return F12{F.closed_f1(t), F.closed_f2(t)}; };
  return [&F](double t) -> F12 {
    if (t == 0.0) return {};
    const Contour c(plan_interval(0.75 * t, 1.5 * t, kReference, F.sigma), kReference, F);
    return c.eval_f12(t);
  };
}

}  // namespace

std::vector<Eigen::VectorXd> oracle_convolve(const SectorialTransform& F, std::span<const double> grid,
                                             std::span<const Eigen::VectorXd> samples) {
  if (grid.size() != samples.size()) throw ConfigError("oracle: grid and samples differ in length");
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (!(grid[j] > grid[j - 1])) throw OrderingError("oracle: grid must increase");
  const auto f12 = f12_source(F);
  std::vector<Eigen::VectorXd> out;
  out.reserve(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(samples.empty() ? 0 : samples[0].size());
    F12 right = f12(grid[n] - grid[0]);
    for (std::size_t j = 0; j < n; ++j) {
      const F12 left = right;
      right = f12(grid[n] - grid[j + 1]);
      const double h = grid[j + 1] - grid[j];
      const Eigen::VectorXd slope = (samples[j + 1] - samples[j]) / h;
      u += left.f1 * samples[j] + left.f2 * slope - right.f1 * samples[j + 1] - right.f2 * slope;
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<double> oracle_convolve(const SectorialTransform& F, std::span<const double> grid,
                                    std::span<const double> samples) {
  std::vector<Eigen::VectorXd> g;
  g.reserve(samples.size());
  for (double s : samples) g.push_back(Eigen::VectorXd::Constant(1, s));
  const auto u = oracle_convolve(F, grid, g);
  std::vector<double> out;
  out.reserve(u.size());
  for (const auto& v : u) out.push_back(v[0]);
  return out;
}

}  // namespace fastconv

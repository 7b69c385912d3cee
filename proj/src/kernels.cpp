#include "fastconv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fastconv/error.hpp"

namespace fastconv {

SectorialTransform power_kernel(double nu) {
  if (!(nu > 0.0)) throw ConfigError("power_kernel: nu must be positive");
  SectorialTransform F;
  F.name = "power";
  F.eval = [nu](cplx s) { return std::pow(s, -nu); };
  F.phi = 0.1;
  F.nu = nu;
  F.M = 1.0;
  const double g0 = std::tgamma(nu), g1 = std::tgamma(nu + 1.0), g2 = std::tgamma(nu + 2.0);
  F.closed_f = [nu, g0](double t) { return std::pow(t, nu - 1.0) / g0; };
  F.closed_f1 = [nu, g1](double t) { return t <= 0.0 ? 0.0 : std::pow(t, nu) / g1; };
  F.closed_f2 = [nu, g2](double t) { return t <= 0.0 ? 0.0 : std::pow(t, nu + 1.0) / g2; };
  F.moment_estimate = F.closed_f1;
  return F;
}

SectorialTransform mittag_leffler_kernel(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("mittag_leffler_kernel: alpha must lie in (0, 1)");
  SectorialTransform F;
  F.name = "mittag-leffler";
  F.eval = [alpha](cplx s) { return 1.0 / (1.0 + std::pow(s, alpha)); };
  F.phi = 0.1;
  F.nu = alpha;
  const double edge = alpha * (std::numbers::pi - F.phi);
  F.M = edge > std::numbers::pi / 2 ? 1.0 / std::sin(edge) : 1.0;
  F.closed_f = [alpha](double t) {
    return std::pow(t, alpha - 1.0) * mittag_leffler(alpha, alpha, -std::pow(t, alpha));
  };
  F.closed_f1 = [alpha](double t) {
    return t <= 0.0 ? 0.0 : 1.0 - mittag_leffler(alpha, 1.0, -std::pow(t, alpha));
  };
  F.closed_f2 = [alpha](double t) {
    return t <= 0.0 ? 0.0 : t * (1.0 - mittag_leffler(alpha, 2.0, -std::pow(t, alpha)));
  };
  F.moment_estimate = [alpha](double T) {
    const double v = 1.0 - mittag_leffler(alpha, 1.0, -std::pow(T, alpha));
    return std::clamp(v, 0.0, 1.0);
  };
  return F;
}

SectorialTransform user_kernel(UserKernelSpec spec) {
  if (!spec.eval) throw ConfigError("user_kernel: missing eval");
  if (!spec.phi) throw ConfigError("user_kernel: missing phi");
  if (!spec.nu) throw ConfigError("user_kernel: missing nu");
  if (!spec.M) throw ConfigError("user_kernel: missing M");
  if (!(*spec.nu > 0.0) || !(*spec.M > 0.0) || !(*spec.phi >= 0.0 && *spec.phi < std::numbers::pi / 2))
    throw ConfigError("user_kernel: sector metadata out of range");
  SectorialTransform F;
  F.name = spec.name;
  F.eval = std::move(spec.eval);
  F.sigma = spec.sigma.value_or(0.0);
  F.phi = *spec.phi;
  F.nu = *spec.nu;
  F.M = *spec.M;
  F.moment_estimate = std::move(spec.moment_estimate);
  if (!sector_spot_check(F)) throw ConfigError("user_kernel: sector bound violated for " + F.name);
  return F;
}

bool sector_spot_check(const SectorialTransform& F) {
  constexpr int rays = 16;
  const double half = std::numbers::pi - F.phi;
  for (int j = 0; j < rays; ++j) {
    const double theta = -half + (j + 0.5) * 2.0 * half / rays;
    for (double r = 1e-3; r <= 1e3 * 1.0001; r *= 10.0) {
      const cplx s = F.sigma + std::polar(r, theta);
      const cplx v = F.eval(s);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      if (std::abs(v) > F.M * std::pow(std::abs(s), -F.nu) * (1.0 + 1e-9)) return false;
    }
  }
  return true;
}

double mittag_leffler(double alpha, double beta, double z) {
  using ld = long double;
  const ld az = std::fabs(static_cast<ld>(z));
  ld sum = 0.0L;
  ld prev_mag = -1.0L;
  for (int j = 0; j < 2000; ++j) {
    const ld arg = static_cast<ld>(alpha) * j + beta;
    ld mag;
    if (j == 0) {
      mag = 1.0L / std::tgamma(arg);
    } else if (az == 0.0L) {
      break;
    } else {
      mag = std::exp(j * std::log(az) - std::lgamma(arg));
    }
    const ld term = (z < 0.0 && (j % 2 == 1)) ? -mag : mag;
    sum += term;
    if (j > 2 && mag < prev_mag && mag <= 1e-21L * std::max<ld>(1.0L, std::fabs(sum))) break;
    prev_mag = mag;
  }
  return static_cast<double>(sum);
}

}  // namespace fastconv

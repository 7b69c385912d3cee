#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>

namespace fastconv {

using cplx = std::complex<double>;

/// Laplace transform F of a real kernel f, analytic in |arg(s - sigma)| < pi - phi
/// with |F(s)| <= M |s|^-nu there.
struct SectorialTransform {
  std::string name;
  std::function<cplx(cplx)> eval;
  double sigma = 0.0;
  double phi = 0.0;
  double nu = 0.0;
  double M = 1.0;

  // Time-domain references (may be empty).
  std::function<double(double)> closed_f;
  std::function<double(double)> closed_f1;
  std::function<double(double)> closed_f2;
  /// Approximation of the integral of |f| over [0, T].
  std::function<double(double)> moment_estimate;

  cplx operator()(cplx s) const { return eval(s); }
  bool has_closed_forms() const { return closed_f1 && closed_f2; }
};

/// F(s) = s^-nu, f(t) = t^(nu-1) / Gamma(nu).
SectorialTransform power_kernel(double nu);

/// F(s) = 1 / (1 + s^alpha), f(t) = -d/dt E_alpha(-t^alpha).
SectorialTransform mittag_leffler_kernel(double alpha);

struct UserKernelSpec {
  std::string name = "user";
  std::function<cplx(cplx)> eval;
  std::optional<double> sigma;
  std::optional<double> phi;
  std::optional<double> nu;
  std::optional<double> M;
  std::function<double(double)> moment_estimate;
};

/// Wraps a user transform. Throws ConfigError when metadata is missing or the
/// sector bound fails on the sampled rays.
SectorialTransform user_kernel(UserKernelSpec spec);

/// Samples |F(s)| <= M|s|^-nu on 16 rays inside the sector at radii 1e-3..1e3.
bool sector_spot_check(const SectorialTransform& F);

/// Two-parameter Mittag-Leffler function by its power series in long double.
/// Reliable for |z| up to about 10.
double mittag_leffler(double alpha, double beta, double z);

}  // namespace fastconv

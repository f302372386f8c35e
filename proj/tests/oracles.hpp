#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;

// Escape-time Green function: iterate until |z| is huge, then log|z_n| / 2^n.
inline double green(cplx lam, cplx z, int n_max = 100000) {
  for (int n = 0; n < n_max; ++n) {
    if (std::abs(z) > 1e150) return std::ldexp(std::log(std::abs(z)), -n);
    z = lam * z + z * z;
  }
  return 0.0;
}

// Real point x > 0 with G_1(x) = g, by bisection on the real axis.
inline double real_axis_level(double g) {
  double lo = 1e-12, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    double mid = std::sqrt(lo * hi);
    if (green(cplx(1.0), cplx(mid)) < g)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

// Forward iterate of f_lambda.
inline cplx iterate(cplx lam, cplx z, int n) {
  for (int i = 0; i < n; ++i) z = lam * z + z * z;
  return z;
}

}  // namespace oracle

namespace oracle {

// Period-q center of z^2 + c from a seed, converted to lambda = 1 + sqrt(1 - 4c)
// with the root in the closed upper half-plane.
inline cplx center_lambda(int q, cplx lam_seed) {
  cplx c = lam_seed / 2.0 - lam_seed * lam_seed / 4.0;
  for (int it = 0; it < 200; ++it) {
    cplx z = 0.0, dz = 0.0;
    for (int i = 0; i < q; ++i) {
      dz = 2.0 * z * dz + 1.0;
      z = z * z + c;
    }
    cplx step = z / dz;
    c -= step;
    if (std::abs(step) < 1e-15) break;
  }
  cplx s = std::sqrt(1.0 - 4.0 * c);
  cplx lam = 1.0 + s;
  if (lam.imag() < 0.0 || (lam.imag() == 0.0 && lam.real() > 1.0)) lam = 1.0 - s;
  return lam;
}

}  // namespace oracle

#include "pimplode/quadmap.hpp"

#include <cmath>

namespace pimplode {

cplx alpha(cplx lam) {
  if (!(lam.imag() > 0.0)) throw Error(Err::BranchUndefined, "alpha: lambda not in the upper half-plane");
  return std::log(lam) / cplx(0.0, kTwoPi);
}

bool in_implosive_sector(cplx lam, double r0) {
  if (!(lam.imag() > 0.0)) return false;
  cplx a = alpha(lam);
  return std::abs(a) < r0 && std::abs(std::arg(a)) < kPi / 4.0;
}

namespace {

// Pulls the landing point of the angle-0 ray back along f^k from the point z
// with f^k(z) real positive.
cplx pull_back_to_zero(cplx z, int k) {
  auto fk = [k](cplx x, cplx& dx) {
    dx = 1.0;
    for (int i = 0; i < k; ++i) {
      dx *= 1.0 + 2.0 * x;
      x = x + x * x;
    }
    return x;
  };
  cplx d;
  const double top = fk(z, d).real();
  const int steps = 256;
  for (int s = steps - 1; s >= 0; --s) {
    const double target = top * static_cast<double>(s) / steps;
    for (int it = 0; it < 60; ++it) {
      cplx v = fk(z, d) - target;
      cplx step = v / d;
      z -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
  }
  return z;
}

}  // namespace

cplx boundary_point(const Dyadic& theta) {
  Dyadic t = theta.mod1();
  const int k = static_cast<int>(t.exp);
  if (t.num == 0) return {0.0, 0.0};
  const double h = std::ldexp(0.5, -k);
  const cplx lam(1.0, 0.0);
  cplx z = bottcher_param(lam, h, t.value());
  return pull_back_to_zero(z, k);
}

cplx boundary_point(double theta) {
  double t = theta - std::floor(theta);
  for (int k = 0; k <= 30; ++k) {
    double s = std::ldexp(t, k);
    if (s == std::floor(s)) return boundary_point(Dyadic::normalize(static_cast<std::int64_t>(s), k));
  }
  const cx128 lam(1);
  const int n = 31;
  auto poly = trace_ray(lam, cx128::value_type(t), cx128::value_type(1), cx128::value_type(std::ldexp(1.0, -(n - 1))), n);
  const auto& sm = poly.samples;
  cx128 z1 = sm[n - 3].point, z2 = sm[n - 2].point, z3 = sm[n - 1].point;
  cx128 d1 = z2 - z1, d2 = z3 - z2;
  cx128 den = d2 - d1;
  if (to_double<cx128>(abs(den)) < 1e-60) return to_cplx(z3);
  return to_cplx(z3 - d2 * d2 / den);
}

void write_ray_csv(std::ostream& os, const std::vector<RayPolyline>& rays, bool header) {
  if (header) os << "angle,potential,re,im\n";
  for (const auto& r : rays) {
    for (const auto& s : r.samples) {
      os << fmt_num(r.angle) << ',' << fmt_num(s.potential) << ',' << fmt_num(s.point.real()) << ','
         << fmt_num(s.point.imag()) << '\n';
    }
  }
}

}  // namespace pimplode

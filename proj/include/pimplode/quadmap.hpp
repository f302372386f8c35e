#pragma once

#include "pimplode/xnum.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace pimplode {

// f(z) = lambda z + z^2.
template <class T>
T eval_f(const T& lam, const T& z) {
  return lam * z + z * z;
}

template <class C>
C crit_point(const C& lam) {
  return -lam / C(2);
}

template <class C>
C crit_value(const C& lam) {
  return -(lam * lam) / C(4);
}

template <class C>
real_t<C> escape_radius(const C& lam) {
  using std::abs;
  using R = real_t<C>;
  R r = R(2) * abs(lam) + R(2);
  return r < R(4) ? R(4) : r;
}

template <class C>
struct RaySample {
  real_t<C> potential;
  C point;
};

template <class C>
struct RayPolylineT {
  real_t<C> angle;
  std::vector<RaySample<C>> samples;
};

using RayPolyline = RayPolylineT<cplx>;

namespace detail {

template <class T>
struct base_of {
  using type = T;
};
template <class C>
struct base_of<Dual<C>> {
  using type = C;
};
template <class T>
using base_t = typename base_of<T>::type;

template <class C>
const C& val(const C& x) {
  return x;
}
template <class C>
const C& val(const Dual<C>& x) {
  return x.v;
}

template <class T>
T mk(const base_t<T>& c) {
  if constexpr (std::is_same_v<T, base_t<T>>) {
    return c;
  } else {
    return T{c, base_t<T>(0)};
  }
}

template <class C>
C lg(const C& x) {
  using std::log;
  return log(x);
}
template <class C>
Dual<C> lg(const Dual<C>& x) {
  return dlog(x);
}
template <class C>
C ex(const C& x) {
  using std::exp;
  return exp(x);
}
template <class C>
Dual<C> ex(const Dual<C>& x) {
  return dexp(x);
}

// log|z| + sum 2^{-k-1} log|1 + lam/z_k| once |z| is past the escape radius.
template <class C>
real_t<C> green_tail(const C& lam, C z) {
  using std::abs;
  using std::log;
  using R = real_t<C>;
  const R eps = std::numeric_limits<R>::epsilon();
  R acc = log(abs(z));
  R w(0.5);
  for (int k = 0; k < 64; ++k) {
    C q = lam / z;
    if (abs(q) < eps) break;
    acc += w * log(abs(C(1) + q));
    w /= R(2);
    z = eval_f(lam, z);
  }
  return acc;
}

// Boettcher coordinate by the product formula; valid outside the escape radius.
template <class T>
T outer_bottcher(const T& lam, const T& z0) {
  using C = base_t<T>;
  using R = real_t<C>;
  using std::abs;
  const R eps = std::numeric_limits<R>::epsilon();
  T s = mk<T>(C(0));
  T z = z0;
  R w(0.5);
  for (int k = 0; k < 80; ++k) {
    T q = lam / z;
    if (abs(val(q)) < eps) break;
    s = s + mk<T>(C(w)) * lg(mk<T>(C(1)) + q);
    w /= R(2);
    z = eval_f(lam, z);
  }
  return z0 * ex(s);
}

// e^{2^n (h + 2 pi i theta)} split as modulus exponent and angle in turns.
template <class R>
struct Level {
  int n;
  R re;
  R turn;
};

template <class R>
R frac_turn(R t) {
  using std::floor;
  return t - floor(t);
}

template <class R>
Level<R> level_for(R h, R theta, R gtop) {
  using std::ceil;
  using std::log2;
  int n = 0;
  if (h < gtop) n = static_cast<int>(ceil(log2(gtop / h)));
  R re = h;
  R tu = frac_turn(theta);
  for (int i = 0; i < n; ++i) {
    re *= R(2);
    tu = frac_turn(tu * R(2));
  }
  return {n, re, tu};
}

template <class C>
C exp_level(const Level<real_t<C>>& lv) {
  using std::cos;
  using std::exp;
  using std::sin;
  using R = real_t<C>;
  R a = R(2) * pi_of<C>() * lv.turn;
  R m = exp(lv.re);
  return C(m * cos(a), m * sin(a));
}

// Newton on a scaled residual returning (residual, derivative).
template <class C, class Resid>
std::optional<C> polish(Resid&& res, C x, int max_it = 60) {
  using std::abs;
  using std::sqrt;
  using R = real_t<C>;
  const R eps = std::numeric_limits<R>::epsilon();
  const R tol_res = R(1e3) * eps;
  for (int it = 0; it < max_it; ++it) {
    auto [f, df] = res(x);
    R af = abs(f);
    if (!(af == af)) return std::nullopt;
    if (af <= tol_res) return x;
    if (abs(df) == R(0)) return std::nullopt;
    C step = f / df;
    x = x - step;
    if (abs(step) <= R(16) * eps * abs(x)) {
      auto [f2, df2] = res(x);
      (void)df2;
      if (abs(f2) <= sqrt(eps)) return x;
      return std::nullopt;
    }
  }
  auto [f, df] = res(x);
  (void)df;
  if (abs(f) <= sqrt(eps) * R(1e-2)) return x;
  return std::nullopt;
}

// Continuation in potential with geometric halving and log-bisection on
// rejected steps. solve(h, seed) returns the polished point and its tangent
// d/dh, or nothing. Returns the points at each requested potential.
template <class C, class Solve>
std::vector<RaySample<C>> descend(Solve&& solve, std::pair<C, C> start, real_t<C> h0,
                                  const std::vector<real_t<C>>& targets, real_t<C> max_dh = real_t<C>(0.25),
                                  int max_bisect = 20) {
  using R = real_t<C>;
  using std::abs;
  using std::sqrt;
  std::vector<RaySample<C>> out;
  C x1 = start.first, dx1 = start.second;
  R h = h0;
  std::size_t ti = 0;
  while (ti < targets.size() && targets[ti] >= h) {
    out.push_back({targets[ti], x1});
    ++ti;
  }
  while (ti < targets.size()) {
    R goal = targets[ti];
    R hn = h / R(2);
    if (h - hn > max_dh) hn = h - max_dh;
    if (hn < goal) hn = goal;
    bool ok = false;
    for (int b = 0; b <= max_bisect; ++b) {
      C seed = x1 + dx1 * C(hn - h);
      R pred = abs(seed - x1);
      auto r = solve(hn, seed);
      if (r) {
        R dev = abs(r->first - seed);
        R floor_dev = R(1e4) * std::numeric_limits<R>::epsilon() * (abs(r->first) + R(1));
        if (dev <= R(0.25) * pred + floor_dev) {
          x1 = r->first;
          dx1 = r->second;
          h = hn;
          ok = true;
          break;
        }
      }
      hn = sqrt(h * hn);
    }
    if (!ok) throw Error(Err::ContinuationFailed, "ray continuation rejected after bisection");
    while (ti < targets.size() && targets[ti] >= h) {
      out.push_back({targets[ti], x1});
      ++ti;
    }
  }
  return out;
}

template <class R>
std::vector<R> geometric(R hi, R lo, int n) {
  using std::exp;
  using std::log;
  std::vector<R> v;
  if (n < 2) n = 2;
  R a = log(hi), b = log(lo);
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      v.push_back(hi);
    } else if (i == n - 1) {
      v.push_back(lo);
    } else {
      v.push_back(exp(a + (b - a) * R(i) / R(n - 1)));
    }
  }
  return v;
}

template <class R>
R potential_floor() {
  if constexpr (std::is_same_v<R, double>) {
    return R(1e-11);
  } else {
    using std::pow;
    return pow(R(2), -(std::numeric_limits<R>::digits / 3));
  }
}

}  // namespace detail

template <class C>
real_t<C> green(const C& lam, C z, const real_t<C>& radius, long n_max) {
  using std::abs;
  using std::ldexp;
  for (long n = 0; n <= n_max; ++n) {
    if (abs(z) > radius) return ldexp(detail::green_tail(lam, z), -static_cast<int>(n));
    z = eval_f(lam, z);
  }
  return real_t<C>(0);
}

template <class C>
real_t<C> green(const C& lam, const C& z) {
  return green(lam, z, escape_radius(lam), 20000);
}

// Boettcher coordinate with square-root branches chosen along the orbit.
template <class C>
C bottcher(const C& lam, const C& z) {
  using std::abs;
  using std::sqrt;
  using R = real_t<C>;
  const R rad = escape_radius(lam);
  const R gz = green(lam, z);
  const R gc = green(lam, crit_point(lam));
  if (!(gz > gc)) throw Error(Err::OutsideDomain, "bottcher: potential not above critical level");
  std::vector<C> orbit{z};
  while (abs(orbit.back()) <= rad) {
    orbit.push_back(eval_f(lam, orbit.back()));
    if (orbit.size() > 200000) throw Error(Err::OutsideDomain, "bottcher: orbit did not escape");
  }
  C w = detail::outer_bottcher(lam, orbit.back());
  for (std::size_t k = orbit.size() - 1; k-- > 0;) {
    C r = sqrt(w);
    C ref = orbit[k] + lam / C(2);
    w = (abs(r - ref) <= abs(-r - ref)) ? r : -r;
  }
  return w;
}

template <class C>
real_t<C> dyn_gtop(const C& lam) {
  using std::abs;
  using std::log;
  using R = real_t<C>;
  return log(R(2) * escape_radius(lam) + abs(lam)) + R(1);
}

// Residual of outer(f^n(z)) = e^{2^n w} scaled by e^{-2^n w}.
template <class C>
std::pair<C, C> ray_residual(const C& lam, const C& z, const detail::Level<real_t<C>>& lv) {
  using D = Dual<C>;
  D L{lam, C(0)};
  D x{z, C(1)};
  for (int i = 0; i < lv.n; ++i) x = eval_f(L, x);
  D om = detail::outer_bottcher(L, x);
  C e = detail::exp_level<C>(lv);
  return {om.v / e - C(1), om.d / e};
}

// Ray point at potential h with its tangent d/dh.
template <class C>
std::optional<std::pair<C, C>> ray_solve(const C& lam, real_t<C> theta, real_t<C> gtop, real_t<C> h,
                                         const C& seed) {
  using std::ldexp;
  auto lv = detail::level_for(h, theta, gtop);
  auto r = detail::polish([&](const C& z) { return ray_residual(lam, z, lv); }, seed);
  if (!r) return std::nullopt;
  auto [f, df] = ray_residual(lam, *r, lv);
  C dlog = df / (C(1) + f);
  return std::make_pair(*r, C(ldexp(real_t<C>(1), lv.n)) / dlog);
}

template <class C>
RayPolylineT<C> trace_ray(const C& lam, real_t<C> theta, real_t<C> pot_hi, real_t<C> pot_lo,
                          int n_steps) {
  using R = real_t<C>;
  using std::abs;
  if (!(pot_hi > pot_lo) || n_steps < 2)
    throw Error(Err::OutsideDomain, "trace_ray: need pot_hi > pot_lo and n_steps >= 2");
  if (pot_lo < detail::potential_floor<R>())
    throw Error(Err::PrecisionExhausted, "trace_ray: potential below precision floor");
  const R gtop = dyn_gtop(lam);
  const R h0 = pot_hi > gtop ? pot_hi : gtop;
  auto lv0 = detail::level_for(h0, theta, gtop);
  C seed = detail::exp_level<C>(lv0) - lam / C(2);
  auto solve = [&](R h, const C& s) { return ray_solve(lam, theta, gtop, h, s); };
  auto z0 = solve(h0, seed);
  if (!z0) throw Error(Err::ContinuationFailed, "trace_ray: top polish failed");
  auto targets = detail::geometric(pot_hi, pot_lo, n_steps);
  RayPolylineT<C> poly{theta, detail::descend<C>(solve, *z0, h0, targets)};
  return poly;
}

// psi(w) = inverse Boettcher of e^w, w = potential + 2 pi i angle.
template <class C>
C bottcher_param(const C& lam, real_t<C> potential, real_t<C> angle) {
  using R = real_t<C>;
  const R gtop = dyn_gtop(lam);
  if (potential >= gtop) {
    auto lv = detail::level_for(potential, angle, gtop);
    C seed = detail::exp_level<C>(lv) - lam / C(2);
    auto r = ray_solve(lam, angle, gtop, potential, seed);
    if (!r) throw Error(Err::ContinuationFailed, "bottcher_param: polish failed");
    return r->first;
  }
  auto poly = trace_ray(lam, angle, gtop, potential, 2);
  return poly.samples.back().point;
}

// Branch Im log lambda in (0, pi); requires the upper half-plane.
cplx alpha(cplx lam);
bool in_implosive_sector(cplx lam, double r0);

// Landing point of the angle-theta ray of f_1 on the boundary of K_1.
cplx boundary_point(double theta);
cplx boundary_point(const Dyadic& theta);

void write_ray_csv(std::ostream& os, const std::vector<RayPolyline>& rays, bool header = true);

}  // namespace pimplode

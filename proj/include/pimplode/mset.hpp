#pragma once

#include "pimplode/quadmap.hpp"

#include <ostream>
#include <vector>

namespace pimplode {

struct WakeSpec {
  int p = 1;
  int q = 1;
  cplx root;
  // Numerators over 2^q - 1, lower then upper.
  std::int64_t lo_num = 0;
  std::int64_t hi_num = 0;
  double lo() const;
  double hi() const;
  double midpoint() const;
};

WakeSpec wake_spec(int p, int q);

struct DefectRecord {
  int q = 0;
  cplx lambda;
  double defect = 0.0;
  double scaled = 0.0;
  double potential = 0.0;
  bool yoccoz_ok = false;
};

template <class C>
real_t<C> green_M(const C& lam) {
  return green(lam, crit_value(lam));
}

// omega_lambda(cv_lambda).
template <class C>
C bottcher_M(const C& lam) {
  return bottcher(lam, crit_value(lam));
}

namespace detail {

// Residual of outer(f^n(cv)) = e^{2^n w} in the parameter, scaled by e^{-2^n w}.
template <class C>
std::pair<C, C> param_residual(const C& lam, const Level<real_t<C>>& lv) {
  using D = Dual<C>;
  D L{lam, C(1)};
  D x{-(lam * lam) / C(4), -lam / C(2)};
  for (int i = 0; i < lv.n; ++i) x = eval_f(L, x);
  D om = outer_bottcher(L, x);
  C e = exp_level<C>(lv);
  return {om.v / e - C(1), om.d / e};
}

template <class R>
R param_gtop() {
  return R(8);
}

template <class C>
std::optional<std::pair<C, C>> param_solve(real_t<C> theta, real_t<C> h, const C& seed) {
  using std::ldexp;
  auto lv = level_for(h, theta, param_gtop<real_t<C>>());
  auto r = polish([&](const C& l) { return param_residual(l, lv); }, seed);
  if (!r) return std::nullopt;
  auto [f, df] = param_residual(*r, lv);
  C dlog = df / (C(1) + f);
  return std::make_pair(*r, C(ldexp(real_t<C>(1), lv.n)) / dlog);
}

template <class R>
R signed_turn(R theta) {
  using std::floor;
  R t = theta - floor(theta);
  if (t >= R(0.5)) t -= R(1);
  return t;
}

template <class C>
std::pair<C, C> param_top(real_t<C> theta, real_t<C> h0) {
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;
  using R = real_t<C>;
  R a = R(2) * pi_of<C>() * theta;
  C ew = C(exp(h0) * cos(a), exp(h0) * sin(a));
  C s = sqrt(ew - C(R(1) / R(4)));
  if (s.real() < R(0)) s = -s;
  C seed = C(1) + C(0, 2) * s;
  auto r = param_solve<C>(theta, h0, seed);
  if (!r) throw Error(Err::ContinuationFailed, "psi_M: top polish failed");
  return *r;
}

}  // namespace detail

// Parameter ray of angle theta (turns, taken in (-1/2, 1/2)) sampled
// geometrically in potential.
template <class C>
RayPolylineT<C> trace_param_ray(real_t<C> theta, real_t<C> pot_hi, real_t<C> pot_lo, int n_steps) {
  using R = real_t<C>;
  R t = detail::signed_turn(theta);
  if (!(pot_hi > pot_lo) || n_steps < 2)
    throw Error(Err::OutsideDomain, "trace_param_ray: need pot_hi > pot_lo and n_steps >= 2");
  if (!(pot_lo > R(0))) throw Error(Err::OutsideDomain, "trace_param_ray: potential must be positive");
  if (pot_lo < detail::potential_floor<R>())
    throw Error(Err::PrecisionExhausted, "trace_param_ray: potential below precision floor");
  const R gtop = detail::param_gtop<R>();
  const R h0 = pot_hi > gtop ? pot_hi : gtop;
  auto top = detail::param_top<C>(t, h0);
  auto solve = [&](R h, const C& s) { return detail::param_solve<C>(t, h, s); };
  auto targets = detail::geometric(pot_hi, pot_lo, n_steps);
  return {t, detail::descend<C>(solve, top, h0, targets)};
}

// Inverse parameter Boettcher map on the sheet |Im w| < pi, w = potential + 2 pi i angle.
template <class C>
C psi_M(real_t<C> potential, real_t<C> angle) {
  using R = real_t<C>;
  using std::abs;
  using std::floor;
  if (!(potential > R(0))) throw Error(Err::OutsideDomain, "psi_M: potential must be positive");
  if (!(abs(angle) < R(0.5))) throw Error(Err::SheetViolation, "psi_M: |Im w| >= pi");
  const R gtop = detail::param_gtop<R>();
  if (potential >= gtop) return detail::param_top<C>(angle, potential).first;
  return trace_param_ray<C>(angle, gtop, potential, 2).samples.back().point;
}

// Angle test on the parameter Boettcher coordinate; false on M.
bool wake_membership(cplx lam, const WakeSpec& wake);

cplx limb_center(int q);

DefectRecord yoccoz_defect(cplx lam, int p, int q);

double wake_bound_rhs(int q, double g);
bool within_wake_bound(cplx lam, int q, double g);

void write_defect_csv(std::ostream& os, const std::vector<DefectRecord>& rows, bool header = true);

}  // namespace pimplode

#include "pimplode/fatou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace pimplode {

namespace {

constexpr int kTerms = 16;
constexpr double kEscape = 4.0;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// u -> u^2/(u-1) written to keep precision for large u.
cplx step_u(cplx u) { return u + 1.0 + 1.0 / (u - 1.0); }

// Local inverse of f_1 fixing 0.
cplx inv_branch(cplx z) { return 2.0 * z / (1.0 + std::sqrt(1.0 + 4.0 * z)); }

bool series_ready(cplx u, bool attracting) {
  if (std::abs(u) < kSeriesRadius) return false;
  return attracting ? (u.real() > std::abs(u.imag())) : (-u.real() > std::abs(u.imag()));
}

// Series value after pushing z forward into the attracting petal; no constant.
cplx raw_attr(cplx z) {
  if (z == cplx(0.0, 0.0)) throw Error(Err::NotInPetal, "phi_attr: z = 0");
  cplx u = -1.0 / z;
  long n = 0;
  while (!series_ready(u, true)) {
    if (u == cplx(1.0, 0.0)) throw Error(Err::NotInPetal, "phi_attr: orbit hits 0");
    cplx un = step_u(u);
    if (!(un.real() > u.real()) || ++n > 100000) throw Error(Err::NotInPetal, "phi_attr: orbit not monotone in petal");
    u = un;
  }
  return detail::series_attr(u) - static_cast<double>(n);
}

template <class Fn>
cplx invert_series(Fn&& a, cplx v, cplx seed) {
  cplx u = seed;
  for (int it = 0; it < 100; ++it) {
    cplx step = (a(u) - v) / detail::series_deriv(u);
    u -= step;
    if (std::abs(step) <= 1e-15 * std::abs(u)) return u;
  }
  throw Error(Err::NoConvergence, "series inversion failed");
}

}  // namespace

const std::vector<double>& fatou_series_coeffs() {
  static const std::vector<double> b = [] {
    std::vector<double> c(kTerms + 1, 0.0);
    for (int m = 2; m <= kTerms + 1; ++m) {
      double s = 1.0 - 1.0 / m;
      for (int k = 1; k <= m - 2; ++k) s += c[k] * binom(k, m - k) * (((m - k) % 2) ? -1.0 : 1.0);
      c[m - 1] = s / (m - 1);
    }
    return c;
  }();
  return b;
}

namespace detail {

cplx log_upper(cplx u) { return std::log(-u) + cplx(0.0, kPi); }

static cplx series_tail(cplx u) {
  const auto& b = fatou_series_coeffs();
  cplx inv = 1.0 / u, p = inv, s = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    s += b[k] * p;
    p *= inv;
  }
  return s;
}

cplx series_attr(cplx u) { return u - std::log(u) + series_tail(u); }
cplx series_rep(cplx u) { return u - log_upper(u) + series_tail(u); }

cplx series_deriv(cplx u) {
  const auto& b = fatou_series_coeffs();
  cplx inv = 1.0 / u, p = inv * inv, s = 1.0 - inv;
  for (int k = 1; k <= kTerms; ++k) {
    s -= static_cast<double>(k) * b[k] * p;
    p *= inv;
  }
  return s;
}

}  // namespace detail

BasinPoint basin_test(cplx z, long horizon) {
  BasinPoint r;
  for (long n = 0; n <= horizon; ++n) {
    const double x = z.real(), y = z.imag(), m2 = x * x + y * y;
    if (m2 > kEscape * kEscape) {
      r.status = BasinStatus::escapes;
      r.z = z;
      r.steps_to_petal = n;
      return r;
    }
    if (m2 == 0.0) {
      r.status = BasinStatus::escapes;
      r.z = z;
      return r;
    }
    if (-x > 20.0 * m2 && std::abs(y) < -x) {
      r.status = BasinStatus::in_basin;
      r.z = z;
      r.steps_to_petal = n;
      return r;
    }
    z = z + z * z;
  }
  r.z = z;
  return r;
}

cplx attr_constant() {
  static const cplx c = 1.0 - raw_attr(cplx(-0.25, 0.0));
  return c;
}

cplx phi_attr(cplx z) { return raw_attr(z) + attr_constant(); }

cplx phi_attr_limit(cplx z, double stop, bool richardson) {
  if (z == cplx(0.0, 0.0)) throw Error(Err::NotInPetal, "phi_attr: z = 0");
  cplx u = -1.0 / z;
  long n = 0;
  auto advance = [&](double radius) {
    while (std::abs(u) < radius || !(u.real() > std::abs(u.imag()))) {
      cplx un = step_u(u);
      if (!(un.real() > u.real()) || ++n > 100000000) throw Error(Err::NotInPetal, "phi_attr: orbit not monotone");
      u = un;
    }
    return std::make_pair(u, u - static_cast<double>(n) - std::log(u));
  };
  auto [u1, a1] = advance(stop);
  if (!richardson) return a1 + attr_constant();
  auto [u2, a2] = advance(2.0 * stop);
  return (u2 * a2 - u1 * a1) / (u2 - u1) + attr_constant();
}

cplx phi_rep(cplx z) {
  if (z == cplx(0.0, 0.0)) throw Error(Err::NotInPetal, "phi_rep: z = 0");
  long n = 0;
  cplx u = -1.0 / z;
  while (!series_ready(u, false)) {
    cplx zn = inv_branch(z);
    cplx un = -1.0 / zn;
    if (!(un.real() < u.real()) || ++n > 100000) throw Error(Err::NotInPetal, "phi_rep: backward orbit not in petal");
    z = zn;
    u = un;
  }
  return detail::series_rep(u) + static_cast<double>(n) + attr_constant();
}

cplx rho1(cplx z) {
  BasinPoint b = basin_test(z);
  if (b.status == BasinStatus::escapes) throw Error(Err::NotInBasin, "rho1: orbit escapes or hits 0");
  if (b.status != BasinStatus::in_basin) throw Error(Err::Indeterminate, "rho1: basin horizon exceeded");
  return phi_attr(b.z) - static_cast<double>(b.steps_to_petal);
}

cplx phi_attr_inv(cplx v) {
  cplx t = v - attr_constant();
  long m = 0;
  double need = kSeriesRadius + 5.0 + std::abs(t.imag()) - t.real();
  if (need > 0.0) m = static_cast<long>(std::ceil(need));
  cplx x = t + static_cast<double>(m);
  cplx u = invert_series(detail::series_attr, x, x + std::log(x));
  cplx z = -1.0 / u;
  for (long i = 0; i < m; ++i) z = inv_branch(z);
  return z;
}

ChiValue chi1_full(cplx w, int extra_depth, bool settle) {
  cplx t = w - attr_constant();
  long n = 0;
  double need = t.real() + kSeriesRadius + 5.0 + std::abs(t.imag());
  if (need > 0.0) n = static_cast<long>(std::ceil(need));
  n += extra_depth;
  cplx x = t - static_cast<double>(n);
  cplx u = invert_series(detail::series_rep, x, x + detail::log_upper(x));
  ChiValue r;
  cplx z = -1.0 / u;
  for (long k = 0; k < n; ++k) {
    if (!r.escaped && std::abs(z) > kEscape) {
      r.escaped = true;
      r.potential = std::ldexp(green(cplx(1.0), z), static_cast<int>(n - k));
    }
    z = z + z * z;
  }
  r.z = z;
  if (!r.escaped && settle) r.potential = green(cplx(1.0), z);
  return r;
}

cplx chi1(cplx w, int extra_depth) {
  ChiValue r = chi1_full(w, extra_depth);
  if (!std::isfinite(r.z.real()) || !std::isfinite(r.z.imag()))
    throw Error(Err::PrecisionExhausted, "chi1: orbit overflowed");
  return r.z;
}

PerturbedChart::PerturbedChart(cplx lam, double r0) : lam_(lam) {
  if (!in_implosive_sector(lam, r0)) throw Error(Err::NotInSector, "perturbed chart: parameter outside the sector");
  alpha_ = pimplode::alpha(lam);
  sigma_ = 1.0 - lam;
  log_rep_ = std::log(2.0 - lam);
  tail_slope_ = 1.0 / (cplx(0.0, kTwoPi) * alpha_ * lam_) + 1.0 / log_rep_;
  window_ = (1.0 / (3.0 * alpha_)).real();
  c_ = 0.0;
  c_ = 1.0 - raw(crit_value(lam), false).value;
}

cplx PerturbedChart::chart(cplx z) const {
  return std::log(z / sigma_) / (cplx(0.0, kTwoPi) * alpha_) + std::log(1.0 - z / sigma_) / log_rep_;
}

cplx PerturbedChart::defect(cplx z) const {
  return std::log(lam_ + z) / (cplx(0.0, kTwoPi) * alpha_) + std::log(1.0 + z) / log_rep_ - 1.0;
}

PerturbedChart::Eval PerturbedChart::raw(cplx z, bool with_deriv) const {
  using D = Dual<cplx>;
  const cplx tpa = cplx(0.0, kTwoPi) * alpha_;
  auto k = [](cplx c) { return D{c, 0.0}; };
  D x{z, with_deriv ? 1.0 : 0.0};
  D zs = x / k(sigma_);
  D s = dlog(zs) / k(tpa) + dlog(k(1.0) - zs) / k(log_rep_);
  const double stop = 1e-8 * std::abs(sigma_);
  for (long n = 0;; ++n) {
    if (std::abs(x.v) <= stop) break;
    if (std::abs(x.v) > kEscape) throw Error(Err::NotInBasin, "perturbed chart: orbit escapes");
    if (n > 4000000) throw Error(Err::Indeterminate, "perturbed chart: orbit did not settle");
    s = s + dlog(k(lam_) + x) / k(tpa) + dlog(k(1.0) + x) / k(log_rep_) - k(1.0);
    x = k(lam_) * x + x * x;
  }
  s = s + k(tail_slope_ / sigma_) * x;
  return {s.v, s.d};
}

cplx PerturbedChart::phi(cplx z) const { return raw(z, false).value + c_; }

cplx PerturbedChart::phi_plus(cplx z) const { return phi(z) - 1.0 / alpha_; }

cplx PerturbedChart::rho(cplx z) const {
  std::vector<cplx> orbit;
  std::vector<cplx> def;
  cplx x = z;
  const double stop = 1e-8 * std::abs(sigma_);
  while (std::abs(x) > stop) {
    if (std::abs(x) > kEscape) throw Error(Err::NotInBasin, "rho_pert: orbit escapes");
    if (orbit.size() > 4000000) throw Error(Err::Indeterminate, "rho_pert: orbit did not settle");
    orbit.push_back(x);
    def.push_back(defect(x));
    x = lam_ * x + x * x;
  }
  cplx s = tail_slope_ / sigma_ * x;
  std::vector<cplx> tail(orbit.size());
  for (std::size_t i = orbit.size(); i-- > 0;) {
    s += def[i];
    tail[i] = s;
  }
  for (std::size_t n = 0; n < orbit.size(); ++n) {
    cplx v = chart(orbit[n]) + tail[n] + c_;
    if (v.real() > 0.0 && v.real() < window_) return v - static_cast<double>(n);
  }
  throw Error(Err::OutOfWindow, "rho_pert: orbit never entered the window");
}

cplx PerturbedChart::phi_inv(cplx v) const {
  const cplx tpa = cplx(0.0, kTwoPi) * alpha_;
  auto newton = [&](cplx z, cplx t) -> std::optional<cplx> {
    cplx f;
    try {
      f = phi(z) - t;
    } catch (const Error&) {
      return std::nullopt;
    }
    for (int it = 0; it < 80; ++it) {
      Eval ev = raw(z, true);
      cplx step = (ev.value + c_ - t) / ev.deriv;
      double damp = 1.0;
      bool moved = false;
      for (int h = 0; h < 30 && !moved; ++h) {
        cplx zn = z - damp * step;
        try {
          cplx fn = phi(zn) - t;
          if (std::abs(fn) < std::abs(f) * (1.0 - 0.25 * damp) + 1e-13) {
            z = zn;
            f = fn;
            moved = true;
          }
        } catch (const Error&) {
        }
        if (!moved) damp *= 0.5;
      }
      if (!moved) return std::nullopt;
      if (std::abs(damp * step) <= 1e-14 * (std::abs(z) + std::abs(sigma_)) || std::abs(f) <= 1e-12) return z;
    }
    return std::nullopt;
  };
  // Solves chart(z) = target by Newton on the explicit chart only.
  auto chart_inv = [&](cplx z, cplx target) {
    for (int it = 0; it < 40; ++it) {
      cplx d = 1.0 / (tpa * z) + 1.0 / (log_rep_ * (z - sigma_));
      cplx step = (chart(z) - target) / d;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::abs(sigma_)) break;
    }
    return z;
  };
  std::vector<cplx> seeds;
  const bool near_parabolic = std::abs(alpha_) < 0.05;
  if (near_parabolic) seeds.push_back(chi1(v - 1.0 / alpha_));
  cplx e = std::exp(tpa * (v - c_));
  cplx z0 = sigma_ * e / (1.0 + e);
  seeds.push_back(z0);
  try {
    cplx z = z0;
    for (int k = 0; k < 8; ++k) z = chart_inv(z, v - c_ - (raw(z, false).value - chart(z)));
    seeds.push_back(z);
  } catch (const Error&) {
  }
  if (!near_parabolic && std::abs(alpha_) < 0.15) seeds.push_back(chi1(v - 1.0 / alpha_));
  for (const cplx& s : seeds) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) continue;
    if (auto r = newton(s, v)) return *r;
  }
  // The chart jumps by 1/alpha across its cut; the same point may carry a shifted value.
  const cplx inv_a = 1.0 / alpha_;
  for (double k : {1.0, -1.0}) {
    cplx target = v + k * inv_a;
    cplx e2 = std::exp(tpa * (target - c_));
    cplx s = sigma_ * e2 / (1.0 + e2);
    if (auto r = newton(s, target)) return *r;
  }
  throw Error(Err::NoConvergence, "perturbed phi inverse failed");
}

cplx PerturbedChart::chi(cplx w) const {
  const cplx inv_a = 1.0 / alpha_;
  const double margin = std::abs(alpha_) < 0.05 ? 3.0 : 1.5;
  long n = 0;
  if (w.real() + margin >= 0.0) n = static_cast<long>(std::floor(w.real() + margin)) + 1;
  if (std::abs(alpha_) >= 0.05) {
    // Keep the chart seed away from the cut opposite sigma.
    auto cut_gap = [&](long m) {
      cplx v = w - static_cast<double>(m) + inv_a - c_;
      return kPi - std::abs(std::remainder(kTwoPi * (alpha_ * v).real(), kTwoPi));
    };
    if (cut_gap(n + 1) > cut_gap(n)) ++n;
  }
  cplx z = phi_inv(w - static_cast<double>(n) + inv_a);
  for (long k = 0; k < n; ++k) z = lam_ * z + z * z;
  return z;
}

cplx rho_pert(cplx lam, cplx z, double r0) { return PerturbedChart(lam, r0).rho(z); }
cplx chi_pert(cplx lam, cplx w, double r0) { return PerturbedChart(lam, r0).chi(w); }

}  // namespace pimplode

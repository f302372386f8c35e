#include "pimplode/mset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pimplode {

namespace {

int moebius(int n) {
  int m = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      m = -m;
    }
  }
  if (n > 1) m = -m;
  return m;
}

// Orbit of the critical point and its parameter derivative.
struct Orbit {
  std::vector<cplx> z;
  std::vector<cplx> dz;
};

Orbit cp_orbit(cplx lam, int n) {
  Orbit o;
  cplx z = crit_point(lam);
  cplx dz = -0.5;
  o.z.push_back(z);
  o.dz.push_back(dz);
  for (int i = 0; i < n; ++i) {
    dz = z + (lam + 2.0 * z) * dz;
    z = eval_f(lam, z);
    o.z.push_back(z);
    o.dz.push_back(dz);
  }
  return o;
}

// Log-derivative of the period-q factor of f^q(cp) - cp.
cplx deflated_dlog(cplx lam, int q) {
  Orbit o = cp_orbit(lam, q);
  cplx s = 0.0;
  for (int d = 1; d <= q; ++d) {
    if (q % d) continue;
    int mu = moebius(q / d);
    if (!mu) continue;
    cplx pd = o.z[d] - o.z[0];
    cplx dpd = o.dz[d] - o.dz[0];
    s += static_cast<double>(mu) * dpd / pd;
  }
  if (q == 1) s -= 1.0 / lam;
  return s;
}

std::optional<cplx> center_newton(cplx lam, int q) {
  for (int it = 0; it < 200; ++it) {
    cplx s = deflated_dlog(lam, q);
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return std::nullopt;
    if (std::abs(s) == 0.0) return std::nullopt;
    cplx step = 1.0 / s;
    lam -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(lam))) return lam;
  }
  return std::nullopt;
}

bool exact_period(cplx lam, int q) {
  Orbit o = cp_orbit(lam, q);
  double scale = 1.0 + std::abs(o.z[0]);
  if (std::abs(o.z[q] - o.z[0]) > 1e-8 * scale) return false;
  for (int d = 1; d < q; ++d)
    if (std::abs(o.z[d] - o.z[0]) <= 1e-6 * scale) return false;
  return true;
}

// The cycle turns counterclockwise around 0 by one position per step.
bool rotates_once(cplx lam, int q) {
  if (q <= 2) return true;
  Orbit o = cp_orbit(lam, q - 1);
  std::vector<int> idx(q);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return std::arg(o.z[a]) < std::arg(o.z[b]); });
  std::vector<int> pos(q);
  for (int i = 0; i < q; ++i) pos[idx[i]] = i;
  for (int k = 0; k < q; ++k)
    if (pos[(k + 1) % q] != (pos[k] + 1) % q) return false;
  return true;
}

}  // namespace

double WakeSpec::lo() const { return static_cast<double>(lo_num) / static_cast<double>((std::int64_t{1} << q) - 1); }
double WakeSpec::hi() const { return static_cast<double>(hi_num) / static_cast<double>((std::int64_t{1} << q) - 1); }
double WakeSpec::midpoint() const { return 0.5 * (lo() + hi()); }

WakeSpec wake_spec(int p, int q) {
  if (q < 1 || q > 24) throw Error(Err::OutsideDomain, "wake_spec: q out of range");
  p %= q;
  if (p < 0) p += q;
  if ((q > 1 && p == 0) || std::gcd(p, q) != 1) throw Error(Err::OutsideDomain, "wake_spec: p/q not reduced");
  WakeSpec w;
  w.p = p;
  w.q = q;
  w.root = std::polar(1.0, kTwoPi * p / q);
  if (q == 1) return w;
  const std::int64_t n = (std::int64_t{1} << q) - 1;
  if (p == 1) {
    w.lo_num = 1;
    w.hi_num = 2;
    return w;
  }
  for (std::int64_t k = 1; k < n; ++k) {
    std::vector<std::int64_t> orb{k};
    for (int j = 1; j < q; ++j) orb.push_back((orb.back() * 2) % n);
    if ((orb.back() * 2) % n != k) continue;
    std::vector<std::int64_t> s = orb;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) continue;
    auto at = [&](std::int64_t v) { return std::lower_bound(s.begin(), s.end(), v) - s.begin(); };
    bool ok = true;
    for (int j = 0; j < q && ok; ++j) ok = at((orb[j] * 2) % n) == (at(orb[j]) + p) % q;
    if (!ok) continue;
    std::int64_t best = n;
    for (int j = 0; j + 1 < q; ++j) {
      if (s[j + 1] - s[j] < best) {
        best = s[j + 1] - s[j];
        w.lo_num = s[j];
        w.hi_num = s[j + 1];
      }
    }
    return w;
  }
  throw Error(Err::NoConvergence, "wake_spec: no rotation cycle found");
}

bool wake_membership(cplx lam, const WakeSpec& wake) {
  if (!(green_M(lam) > 0.0)) return false;
  cplx om = bottcher_M(lam);
  double t = std::arg(om) / kTwoPi;
  t -= std::floor(t);
  return t >= wake.lo() && t <= wake.hi();
}

cplx limb_center(int q) {
  if (q < 1) throw Error(Err::OutsideDomain, "limb_center: q must be positive");
  const cplx root = std::polar(1.0, kTwoPi / q);
  const double qq = static_cast<double>(q) * q;
  bool lower = false;
  for (double shrink : {1.0 - 1.0 / qq, 1.0 + 1.0 / qq}) {
    auto r = center_newton(shrink * root, q);
    if (!r) continue;
    cplx lam = *r;
    if (std::abs(lam.imag()) <= 1e-13 * std::abs(lam)) lam.imag(0.0);
    if (lam.imag() < 0.0) lam = 2.0 - lam;
    if (!exact_period(lam, q)) {
      lower = true;
      continue;
    }
    if (!rotates_once(lam, q)) continue;
    return lam;
  }
  if (lower) throw Error(Err::WrongComponent, "limb_center: root is a lower-period center");
  throw Error(Err::NoConvergence, "limb_center: Newton failed from both seeds");
}

DefectRecord yoccoz_defect(cplx lam, int p, int q) {
  if (q < 1) throw Error(Err::OutsideDomain, "yoccoz_defect: q must be positive");
  if (lam == cplx(0.0, 0.0) || lam.imag() < 0.0 || !std::isfinite(std::abs(lam)))
    throw Error(Err::BranchUndefined, "yoccoz_defect: lambda outside the closed upper half-plane");
  cplx lg(std::log(std::abs(lam)), std::arg(lam));
  if (lg.imag() <= 0.0 && lam.real() < 0.0) lg.imag(kPi);
  DefectRecord r;
  r.q = q;
  r.lambda = lam;
  r.defect = std::abs(lg - cplx(0.0, kTwoPi * p / q));
  r.scaled = static_cast<double>(q) * q * r.defect;
  r.potential = green_M(lam);
  r.yoccoz_ok = std::abs(lg - cplx(kLog2, kTwoPi * p) / static_cast<double>(q)) <= kLog2 / q;
  return r;
}

double wake_bound_rhs(int q, double g) {
  const double m = std::ldexp(1.0, q) - 1.0;
  return kTwoPi * kLog2 / (q * std::atan(kTwoPi / (m * g)));
}

bool within_wake_bound(cplx lam, int q, double g) { return yoccoz_defect(lam, 1, q).defect <= wake_bound_rhs(q, g); }

void write_defect_csv(std::ostream& os, const std::vector<DefectRecord>& rows, bool header) {
  if (header) os << "q,lambda_re,lambda_im,defect,scaled_defect,potential\n";
  for (const auto& r : rows) {
    os << r.q << ',' << fmt_num(r.lambda.real()) << ',' << fmt_num(r.lambda.imag()) << ',' << fmt_num(r.defect) << ','
       << fmt_num(r.scaled) << ',' << fmt_num(r.potential) << '\n';
  }
}

}  // namespace pimplode

#include "pimplode/lavaurs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace pimplode {

namespace {

cplx f1(cplx z) { return z + z * z; }

cplx psi1(double potential, double angle) {
  return bottcher_param(cplx(1.0), potential, angle - std::floor(angle));
}

// Damped Newton for fn(z) = target; deriv may be empty for a central difference.
std::optional<cplx> solve(const std::function<cplx(cplx)>& fn, const std::function<cplx(cplx)>& deriv, cplx target,
                          cplx z, double tol, int max_it = 60) {
  auto resid = [&](cplx x) -> std::optional<cplx> {
    try {
      cplx r = fn(x) - target;
      if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) return std::nullopt;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto r = resid(z);
  if (!r) return std::nullopt;
  const double scale = 1.0 + std::abs(target);
  for (int it = 0; it < max_it; ++it) {
    if (std::abs(*r) <= tol * scale) return z;
    cplx d(0.0, 0.0);
    if (deriv) {
      try {
        d = deriv(z);
      } catch (const Error&) {
        return std::nullopt;
      }
    } else {
      // Thin escaping slivers can sit next to z; shrink the difference step past them.
      for (double h = 1e-6 * std::max(std::abs(z), 1e-3); h > 1e-11 && d == cplx(0.0, 0.0); h *= 0.01) {
        try {
          d = (fn(z + h) - fn(z - h)) / (2.0 * h);
        } catch (const Error&) {
        }
      }
    }
    if (d == cplx(0.0, 0.0) || !std::isfinite(d.real()) || !std::isfinite(d.imag())) return std::nullopt;
    cplx step = *r / d;
    // Residual at its noise floor: the step is below rounding of z.
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) return z;
    double damp = 1.0;
    bool moved = false;
    for (int h = 0; h < 25; ++h) {
      cplx zn = z - damp * step;
      auto rn = resid(zn);
      if (rn && std::abs(*rn) < std::abs(*r)) {
        z = zn;
        r = rn;
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) return std::abs(*r) <= 1e3 * tol * scale ? std::optional<cplx>(z) : std::nullopt;
  }
  return std::abs(*r) <= 1e3 * tol * scale ? std::optional<cplx>(z) : std::nullopt;
}

cplx newton_level(cplx v, cplx y) {
  auto r = solve([](cplx x) { return chi1(x); }, {}, y, v, 1e-13);
  if (!r) throw Error(Err::NoConvergence, "lavaurs level: chi_1 inversion failed");
  return *r;
}

// Level for potential in [1, 2) at any angle, continued from the axis.
cplx level_at(double s, double a) {
  const double k_axis = detail::chi_axis_potential();
  cplx v = newton_level(cplx(std::log2(s / k_axis), -kPi), psi1(s, 0.0));
  const int steps = static_cast<int>(std::ceil(std::abs(a) * 16.0));
  cplx prev = v;
  for (int i = 1; i <= steps; ++i) {
    double t = a * i / steps;
    cplx guess = (i == 1) ? v : v + (v - prev);
    prev = v;
    v = newton_level(guess, psi1(s, t));
  }
  return v;
}

cplx fm(cplx z, int m) {
  for (int i = 0; i < m; ++i) z = f1(z);
  return z;
}

cplx fm_deriv(cplx z, int m) {
  cplx d = 1.0;
  for (int i = 0; i < m; ++i) {
    d *= 1.0 + 2.0 * z;
    z = f1(z);
  }
  return d;
}

}  // namespace

EnrichedAngle::EnrichedAngle(std::vector<Dyadic> entries) : entries_(std::move(entries)) {
  if (!entries_.empty()) entries_[0] = entries_[0].mod1();
}

EnrichedAngle EnrichedAngle::parse(const std::string& s) {
  std::string body;
  for (char c : s)
    if (c != '(' && c != ')' && c != ' ') body += c;
  std::vector<Dyadic> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(Dyadic::parse(item));
  return EnrichedAngle(std::move(out));
}

EnrichedAngle EnrichedAngle::ceil() const {
  if (entries_.empty()) throw Error(Err::OutsideDomain, "enriched angle: ceil of empty sequence");
  return EnrichedAngle(std::vector<Dyadic>(entries_.begin() + 1, entries_.end()));
}

EnrichedAngle EnrichedAngle::floor() const {
  if (entries_.empty()) throw Error(Err::OutsideDomain, "enriched angle: floor of empty sequence");
  return EnrichedAngle(std::vector<Dyadic>(entries_.begin(), entries_.end() - 1));
}

EnrichedAngle EnrichedAngle::scaled(std::int64_t x) const {
  std::vector<Dyadic> out;
  out.reserve(entries_.size());
  for (const Dyadic& d : entries_) out.push_back(Dyadic::normalize(d.num * x, d.exp));
  return EnrichedAngle(std::move(out));
}

std::string EnrichedAngle::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ",";
    s += entries_[i].str();
  }
  return s + ")";
}

cplx lavaurs_eval(cplx delta, cplx z) {
  cplx x;
  try {
    x = rho1(z);
  } catch (const Error& e) {
    throw Error(Err::NotInBasin, std::string("lavaurs_eval: ") + e.what());
  }
  return chi1(x + delta);
}

cplx mixed_orbit(cplx delta, int n, long m, cplx z) {
  if (n < 0) throw Error(Err::OutsideDomain, "mixed_orbit: n < 0");
  if (n == 0) {
    if (m < 0) throw Error(Err::OutsideDomain, "mixed_orbit: n = 0 needs m >= 0");
    for (long i = 0; i < m; ++i) z = f1(z);
    return z;
  }
  for (int k = 0; k < n; ++k) {
    cplx d = (k == 0) ? delta + static_cast<double>(m) : delta;
    try {
      z = lavaurs_eval(d, z);
    } catch (const Error& e) {
      throw Error(Err::OrbitLeftBasin, "mixed_orbit: step " + std::to_string(k) + ": " + e.what());
    }
  }
  return z;
}

std::vector<NonescapeClass> nonescape_class(cplx delta, int d_max) {
  if (d_max < 0) throw Error(Err::OutsideDomain, "nonescape_class: d_max < 0");
  std::vector<NonescapeClass> out;
  out.push_back({delta, 0, 0.0, true});
  cplx z = crit_point(cplx(1.0));
  for (int d = 1; d <= d_max; ++d) {
    BasinPoint b = basin_test(z);
    if (b.status != BasinStatus::in_basin) {
      out.push_back({delta, d, 0.0, false});
      break;
    }
    ChiValue c = chi1_full(phi_attr(b.z) - static_cast<double>(b.steps_to_petal) + delta);
    if (c.potential > 0.0) {
      out.push_back({delta, d, c.potential, true});
      break;
    }
    z = c.z;
    bool inside = basin_test(z).status == BasinStatus::in_basin;
    out.push_back({delta, d, 0.0, inside});
    if (!inside) break;
  }
  return out;
}

namespace detail {

double chi_axis_potential() {
  static const double k = chi1_full(cplx(0.0, -kPi)).potential;
  return k;
}

cplx lavaurs_level(cplx w) {
  double s = w.real();
  double a = w.imag() / kTwoPi;
  if (!(s > 0.0)) throw Error(Err::OutsideDomain, "lavaurs level: potential must be positive");
  if (!std::isfinite(s) || !std::isfinite(a)) throw Error(Err::PrecisionExhausted, "lavaurs level: non-finite input");
  int j = 0;
  while (s >= 2.0) {
    s *= 0.5;
    a *= 0.5;
    ++j;
  }
  if (s >= 1.0) return level_at(s, a) + static_cast<double>(j);
  if (a == 0.0) {
    int k = 0;
    while (s < 1.0) {
      s *= 2.0;
      ++k;
    }
    return level_at(s, 0.0) - static_cast<double>(k);
  }
  cplx v = level_at(1.0, a);
  const double ratio = std::pow(2.0, -0.25);
  double t = 1.0;
  while (t > s) {
    t = std::max(s, t * ratio);
    v = newton_level(v, psi1(t, a));
  }
  return v;
}

cplx pull_back(cplx y, cplx anchor, int m) {
  std::vector<cplx> orbit{anchor};
  for (int i = 0; i < m; ++i) orbit.push_back(f1(orbit.back()));
  cplx z = y;
  for (int k = m - 1; k >= 0; --k) {
    cplx s = std::sqrt(1.0 + 4.0 * z);
    cplx r1 = 0.5 * (-1.0 + s), r2 = 0.5 * (-1.0 - s);
    z = std::abs(r1 - orbit[k]) <= std::abs(r2 - orbit[k]) ? r1 : r2;
  }
  return z;
}

}  // namespace detail

cplx psi_lavaurs0(cplx delta, cplx w) { return phi_attr_inv(detail::lavaurs_level(w) - delta); }

cplx psi_lavaurs0_shifted(cplx delta, cplx w, double shift) {
  double whole = std::floor(shift);
  cplx v = detail::lavaurs_level(w * std::exp2(shift - whole)) + whole;
  return phi_attr_inv(v - delta);
}

namespace {

// Continues z along Phi(z) = Psi_0(2^t w0) from t_from to t_to.
cplx continue_in_shift(cplx delta, cplx w0, double t_from, double t_to, cplx z,
                       const std::function<cplx(cplx)>& phi, const std::function<cplx(cplx)>& dphi) {
  double t = t_from;
  double step = 0.0;
  auto next_t = [&](double cur) {
    double mag = std::max(std::abs(cur), 1.0);
    double dt = std::min(0.5 * mag, 0.5);
    if (std::abs(cur) > 2.0) dt = 0.4 * std::abs(cur);
    return dt;
  };
  // Outward runs end at a limit point; stop once z is stationary there.
  const bool outward = std::abs(t_to) > std::abs(t_from);
  double last_move = std::numeric_limits<double>::infinity();
  int guard = 0;
  while (t != t_to) {
    if (++guard > 4000) throw Error(Err::ContinuationFailed, "continuation: too many steps");
    if (step == 0.0) step = next_t(t);
    double tn = (t_to < t) ? std::max(t_to, t - step) : std::min(t_to, t + step);
    cplx y = psi_lavaurs0_shifted(delta, w0, tn);
    auto r = solve(phi, dphi, y, z, 1e-13);
    // A move far beyond the previous one is a jump to another branch.
    if (r && std::abs(*r - z) > 4.0 * last_move + 1e-9 * (1.0 + std::abs(z))) r.reset();
    if (!r) {
      if (outward && std::abs(t) > 64.0 && last_move <= 1e-12 * (1.0 + std::abs(z))) return z;
      step *= 0.5;
      if (step < 1e-6) throw Error(Err::ContinuationFailed, "continuation: step underflow");
      continue;
    }
    last_move = std::abs(*r - z);
    z = *r;
    t = tn;
    step = 0.0;
  }
  return z;
}

}  // namespace

namespace {

// W with lavaurs_level(W) = v, picked among the logs of the Boettcher value.
std::optional<cplx> level_lift(cplx v) {
  if (v.real() > 3.0) {
    const double n = std::ceil(v.real() - 3.0);
    auto w = level_lift(v - n);
    if (!w) return std::nullopt;
    return *w * std::exp2(n);
  }
  ChiValue c = chi1_full(v);
  if (!(c.potential > 0.0) || !std::isfinite(c.z.real()) || !std::isfinite(c.z.imag())) return std::nullopt;
  cplx base;
  try {
    base = std::log(bottcher(cplx(1.0), c.z));
  } catch (const Error&) {
    return std::nullopt;
  }
  const cplx guess = detail::chi_axis_potential() * std::exp(std::log(2.0) * (v + cplx(0.0, kPi)));
  const double k0 = std::round((guess.imag() - base.imag()) / kTwoPi);
  for (double dk : {0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0}) {
    cplx cand = base + cplx(0.0, kTwoPi * (k0 + dk));
    try {
      if (std::abs(detail::lavaurs_level(cand) - v) < 1e-7 * (1.0 + std::abs(v))) return cand;
    } catch (const Error&) {
    }
  }
  return std::nullopt;
}

}  // namespace

cplx psi_lavaurs(cplx delta, const EnrichedAngle& theta, cplx w, std::optional<cplx> seed) {
  const std::size_t d = theta.depth();
  if (d == 0) {
    if (!(w.real() > 0.0)) throw Error(Err::OutsideDomain, "psi_lavaurs: potential must be positive");
    return psi1(w.real(), w.imag() / kTwoPi);
  }
  const Dyadic& last = theta[d - 1];
  const int m = static_cast<int>(last.depth());
  auto cls = nonescape_class(delta, static_cast<int>(d));
  if (cls.size() <= d || !cls[d].strong)
    throw Error(Err::NotStronglyNonescaping, "psi_lavaurs: delta not strongly nonescaping at this depth");
  if (!(w.real() > cls[d].g)) throw Error(Err::OutsideDomain, "psi_lavaurs: potential below escape level");
  const cplx w0 = w * std::exp2(static_cast<double>(m));
  if (d == 1) {
    const cplx b = boundary_point(theta[0]);
    const double top = 40.0;
    cplx z = detail::pull_back(psi_lavaurs0_shifted(delta, w0, top), b, m);
    auto phi = [m](cplx x) { return fm(x, m); };
    auto dphi = [m](cplx x) { return fm_deriv(x, m); };
    try {
      return continue_in_shift(delta, w0, top, 0.0, z, phi, dphi);
    } catch (const Error& e) {
      throw Error(Err::BranchAmbiguous, std::string("psi_lavaurs: ") + e.what());
    }
  }
  if (!seed) throw Error(Err::BranchAmbiguous, "psi_lavaurs: depth >= 2 needs a seed in the component");
  const int lifts = static_cast<int>(d) - 1;
  auto phi = [delta, lifts, m](cplx x) {
    for (int i = 0; i < lifts; ++i) x = lavaurs_eval(delta, x);
    return fm(x, m);
  };
  // Locate the seed's coordinate on the invariant component.
  cplx y = phi(*seed);
  std::optional<cplx> ws = level_lift(rho1(y) + delta);
  if (!ws) throw Error(Err::BranchAmbiguous, "psi_lavaurs: seed lift not found");
  cplx z = *seed;
  const int n = 64;
  for (int i = 1; i <= n; ++i) {
    cplx wt = *ws + (w0 - *ws) * (static_cast<double>(i) / n);
    auto r = solve(phi, {}, psi_lavaurs0(delta, wt), z, 1e-12);
    if (!r) throw Error(Err::BranchAmbiguous, "psi_lavaurs: continuation from seed failed");
    z = *r;
  }
  return z;
}

EnrichedRaySegment enriched_ray(cplx delta, const EnrichedAngle& theta, double theta_last, ClipBound from,
                                ClipBound to, int n_samples) {
  const int d = static_cast<int>(theta.depth());
  if (from.level < to.level || from.level > d || to.level < 0)
    throw Error(Err::OutsideDomain, "enriched_ray: need d >= from.level >= to.level >= 0");
  if (n_samples < 2) throw Error(Err::OutsideDomain, "enriched_ray: n_samples >= 2");
  EnrichedRaySegment seg;
  seg.theta = theta;
  seg.theta_last = theta_last;
  auto angle_at = [&](int m) { return m == d ? theta_last : theta[m].value(); };
  auto label_at = [&](int m) {
    return EnrichedAngle(std::vector<Dyadic>(theta.entries().begin(), theta.entries().begin() + m));
  };
  const double hi = 1024.0;
  const double lo = 1.0 / 1024.0;
  for (int m = from.level; m >= to.level; --m) {
    const double a = angle_at(m);
    const EnrichedAngle lab = label_at(m);
    double p_hi = std::numeric_limits<double>::infinity();
    double p_lo = 0.0;
    if (m == from.level && m == to.level) {
      p_hi = std::max(from.potential, to.potential);
      p_lo = std::min(from.potential, to.potential);
    } else if (m == from.level) {
      p_lo = from.potential;
    } else if (m == to.level) {
      p_hi = to.potential;
    }
    std::vector<cplx> piece;
    if (std::isinf(p_hi)) {
      if (m == 0) throw Error(Err::OutsideDomain, "enriched_ray: level 0 needs a finite upper potential");
      if (m == 1) {
        const int md = static_cast<int>(lab[0].depth());
        const cplx w = cplx(1.0, kTwoPi * a) * std::exp2(static_cast<double>(md));
        piece.push_back(detail::pull_back(psi_lavaurs0_shifted(delta, w, 4096.0), boundary_point(lab[0]), md));
      } else {
        piece.push_back(psi_lavaurs(delta, lab, cplx(hi * 1024.0, kTwoPi * a)));
      }
    }
    const double top = std::isinf(p_hi) ? hi : p_hi;
    const double bottom = (p_lo > 0.0) ? p_lo : lo;
    for (double s : detail::geometric(top, bottom, n_samples)) {
      if (m == 0)
        piece.push_back(psi1(s, a));
      else
        piece.push_back(psi_lavaurs(delta, lab, cplx(s, kTwoPi * a)));
    }
    if (p_lo == 0.0 && m == 0) piece.push_back(boundary_point(a));
    seg.levels.push_back(m);
    seg.pieces.push_back(std::move(piece));
  }
  // The infinite end of level m meets the potential-0 end of level m - 1.
  for (std::size_t i = 0; i + 1 < seg.pieces.size(); ++i) {
    double e = std::abs(seg.pieces[i].front() - seg.pieces[i + 1].back());
    seg.gluing_error = std::max(seg.gluing_error, e);
  }
  return seg;
}

cplx EscapeMask::pixel_center(int i, int j) const {
  double x = window.re_min + (i + 0.5) * (window.re_max - window.re_min) / width;
  double y = window.im_max - (j + 0.5) * (window.im_max - window.im_min) / height;
  return {x, y};
}

double EscapeMask::pixel_size() const { return (window.re_max - window.re_min) / width; }

namespace {

void classify_pixel(cplx delta, int d, double g, cplx z, PixelClass& cls, double& pot) {
  pot = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= d; ++k) {
    BasinPoint b = basin_test(z);
    if (b.status == BasinStatus::escapes) {
      // Only the last image may escape.
      double gz = (k == d) ? green(cplx(1.0), z) : 0.0;
      if (k == d && gz > g) {
        cls = PixelClass::certified;
        pot = gz;
      } else {
        cls = PixelClass::out;
      }
      return;
    }
    if (b.status != BasinStatus::in_basin) {
      cls = PixelClass::unclassified;
      return;
    }
    if (k == d) break;
    ChiValue c = chi1_full(phi_attr(b.z) - static_cast<double>(b.steps_to_petal) + delta, 0, false);
    if (c.escaped) {
      if (k + 1 == d && c.potential > g) {
        cls = PixelClass::certified;
        pot = c.potential;
      } else {
        cls = PixelClass::out;
      }
      return;
    }
    z = c.z;
  }
  cls = PixelClass::out;
}

template <class Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, rows);
  if (threads <= 1) {
    for (int j = 0; j < rows; ++j) fn(j);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int j = t; j < rows; j += threads) fn(j);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

EscapeMask escape_mask(cplx delta, int d, double g, const Window& window, int resolution, int threads) {
  if (d < 1) throw Error(Err::OutsideDomain, "escape_mask: d >= 1");
  if (resolution < 4) throw Error(Err::ResolutionTooCoarse, "escape_mask: resolution < 4");
  if (!(window.re_max > window.re_min) || !(window.im_max > window.im_min))
    throw Error(Err::OutsideDomain, "escape_mask: empty window");
  EscapeMask m;
  m.window = window;
  m.width = resolution;
  m.height = std::max(1, static_cast<int>(std::lround(resolution * (window.im_max - window.im_min) /
                                                      (window.re_max - window.re_min))));
  m.cls.assign(static_cast<std::size_t>(m.width) * m.height, PixelClass::out);
  m.potential.assign(m.cls.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_rows(m.height, threads, [&](int j) {
    for (int i = 0; i < m.width; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * m.width + i;
      classify_pixel(delta, d, g, m.pixel_center(i, j), m.cls[idx], m.potential[idx]);
    }
  });
  return m;
}

const char* to_string(CroissantClass c) {
  switch (c) {
    case CroissantClass::zero_croissant:
      return "zero-croissant";
    case CroissantClass::jordan:
      return "jordan";
    default:
      return "other";
  }
}

namespace {

struct Blob {
  long area = 0;
  bool clipped = false;
  int best_i = 0, best_j = 0;
  double best_pot = -1.0;
  // Pixel farthest (4-neighbour steps) from the complement.
  int deep_i = 0, deep_j = 0;
};

std::vector<Blob> components(const EscapeMask& m, std::vector<int>& label) {
  label.assign(m.cls.size(), -1);
  std::vector<Blob> out;
  std::vector<int> stack;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * m.width + i;
      if (m.cls[idx] != PixelClass::certified || label[idx] >= 0) continue;
      Blob b;
      int id = static_cast<int>(out.size());
      label[idx] = id;
      stack.push_back(static_cast<int>(idx));
      while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        int pi = p % m.width, pj = p / m.width;
        ++b.area;
        if (pi == 0 || pj == 0 || pi == m.width - 1 || pj == m.height - 1) b.clipped = true;
        if (m.potential[p] > b.best_pot) {
          b.best_pot = m.potential[p];
          b.best_i = pi;
          b.best_j = pj;
        }
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int qi = pi + di[k], qj = pj + dj[k];
          if (qi < 0 || qj < 0 || qi >= m.width || qj >= m.height) continue;
          std::size_t q = static_cast<std::size_t>(qj) * m.width + qi;
          if (m.cls[q] == PixelClass::certified && label[q] < 0) {
            label[q] = id;
            stack.push_back(static_cast<int>(q));
          }
        }
      }
      out.push_back(b);
    }
  }
  // Multi-source BFS from each component's edge pixels.
  std::vector<int> dist(m.cls.size(), -1);
  std::vector<int> queue;
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * m.width + i;
      if (label[idx] < 0) continue;
      bool edge = false;
      for (int k = 0; k < 4 && !edge; ++k) {
        int qi = i + di[k], qj = j + dj[k];
        edge = qi < 0 || qj < 0 || qi >= m.width || qj >= m.height ||
               label[static_cast<std::size_t>(qj) * m.width + qi] != label[idx];
      }
      if (edge) {
        dist[idx] = 0;
        queue.push_back(static_cast<int>(idx));
      }
    }
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int p = queue[h];
    int pi = p % m.width, pj = p / m.width;
    for (int k = 0; k < 4; ++k) {
      int qi = pi + di[k], qj = pj + dj[k];
      if (qi < 0 || qj < 0 || qi >= m.width || qj >= m.height) continue;
      std::size_t q = static_cast<std::size_t>(qj) * m.width + qi;
      if (label[q] == label[p] && dist[q] < 0) {
        dist[q] = dist[p] + 1;
        queue.push_back(static_cast<int>(q));
      }
    }
  }
  std::vector<int> best(out.size(), -1);
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    if (label[idx] < 0) continue;
    int& b = best[label[idx]];
    if (b < 0 || dist[idx] > dist[b]) b = static_cast<int>(idx);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].deep_i = best[k] % m.width;
    out[k].deep_j = best[k] / m.width;
  }
  return out;
}

struct DyadicPoint {
  Dyadic angle;
  cplx point;
};

std::vector<DyadicPoint> dyadic_points(int depth) {
  std::vector<DyadicPoint> pts;
  for (int e = 0; e <= depth; ++e) {
    const std::int64_t den = std::int64_t{1} << e;
    for (std::int64_t k = 0; k < den; ++k) {
      if (e > 0 && k % 2 == 0) continue;
      Dyadic a = Dyadic::normalize(k, static_cast<std::uint32_t>(e));
      pts.push_back({a, boundary_point(a)});
    }
  }
  return pts;
}

std::optional<Dyadic> nearest_dyadic(const std::vector<DyadicPoint>& pts, cplx z, double tol) {
  const DyadicPoint* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    double dist = std::abs(p.point - z);
    if (dist < best_dist) {
      best_dist = dist;
      best = &p;
    }
  }
  if (best && best_dist <= tol) return best->angle;
  return std::nullopt;
}

// Dyadic angle of a root of f_1^k = 0 within tol of z, for table_depth < k <= max_order.
// Binary digits follow the half-plane of each image; the image -1 carries the last digit.
std::optional<Dyadic> dyadic_root(cplx z, double tol, int table_depth, int max_order) {
  for (int k = table_depth + 1; k <= max_order; ++k) {
    cplx r = z;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const cplx s = fm(r, k) / fm_deriv(r, k);
      r -= s;
      if (!std::isfinite(std::abs(r)) || std::abs(r - z) > 4.0 * tol) break;
      if (std::abs(s) <= 1e-15 * (1.0 + std::abs(r))) {
        converged = true;
        break;
      }
    }
    if (!converged || std::abs(r - z) > tol) continue;
    std::int64_t num = 0;
    cplx y = r;
    int j = 0;
    for (; j < k && std::abs(y + 1.0) > 1e-9 && std::abs(y) > 1e-9; ++j) {
      num = 2 * num + (y.imag() < 0.0 ? 1 : 0);
      y = f1(y);
    }
    if (std::abs(y) <= 1e-9) return Dyadic::normalize(num, static_cast<std::uint32_t>(j));
    num = 2 * num + 1;
    return Dyadic::normalize(num, static_cast<std::uint32_t>(j + 1));
  }
  return std::nullopt;
}

// Half-plane coordinate W with Psi_0(W) = y, when y lies on the invariant component.
std::optional<cplx> invariant_coordinate(cplx delta, cplx y) {
  cplx x;
  try {
    x = rho1(y);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (std::abs(phi_attr_inv(x) - y) > 1e-9 * (1.0 + std::abs(y))) return std::nullopt;
  return level_lift(x + delta);
}

// Ends Psi(infinity), Psi(0) of the angle-0 curve of the component through start.
std::pair<cplx, cplx> trace_pinches(cplx delta, int d, cplx start, int max_period) {
  auto lift = [&](cplx z) {
    for (int k = 0; k + 1 < d; ++k) z = lavaurs_eval(delta, z);
    return z;
  };
  std::optional<cplx> w0;
  int period = -1;
  cplx y = lift(start);
  for (int j = 0; j <= max_period; ++j) {
    if (auto w = invariant_coordinate(delta, y)) {
      w0 = w;
      period = j;
      break;
    }
    y = f1(y);
  }
  if (!w0) throw Error(Err::WrongComponent, "no invariant image within the period bound");
  auto phi = [&](cplx z) { return fm(lift(z), period); };
  std::function<cplx(cplx)> dphi;
  if (d == 1) dphi = [&](cplx z) { return fm_deriv(z, period); };
  // Vertical move to the real axis, then out to both ends.
  cplx z = start;
  const int n = 32;
  const cplx target_w(w0->real(), 0.0);
  for (int i = 1; i <= n; ++i) {
    cplx wt = *w0 + (target_w - *w0) * (static_cast<double>(i) / n);
    auto r = solve(phi, dphi, psi_lavaurs0(delta, wt), z, 1e-12);
    if (!r) throw Error(Err::ContinuationFailed, "vertical continuation failed");
    z = *r;
  }
  const double top = 4096.0;
  return {continue_in_shift(delta, target_w, 0.0, top, z, phi, dphi),
          continue_in_shift(delta, target_w, 0.0, -top, z, phi, dphi)};
}

}  // namespace

Census escape_census(cplx delta, int d, double g, const Window& window, int resolution, const CensusOptions& opt) {
  Census census;
  census.mask = escape_mask(delta, d, g, window, resolution, opt.threads);
  const EscapeMask& m = census.mask;
  std::vector<int> label;
  std::vector<Blob> blobs = components(m, label);
  const double px = m.pixel_size();
  const double tol = opt.match_pixels * px;
  const auto dyadics = dyadic_points(opt.max_dyadic_depth);
  long usable = 0;
  for (const Blob& b : blobs) {
    if (b.area < opt.min_pixels) {
      ++census.too_small;
      continue;
    }
    ++usable;
    ComponentReport rep;
    rep.level_d = d;
    rep.pixel_area = b.area;
    rep.clipped = b.clipped;
    const cplx zc = m.pixel_center(b.best_i, b.best_j);
    rep.base_point = zc;
    rep.base_dyadic = nearest_dyadic(dyadics, zc, tol);
    if (g > 0.0) {
      rep.croissant_class = CroissantClass::jordan;
      rep.note = "g > 0";
      census.components.push_back(rep);
      continue;
    }
    std::optional<std::pair<cplx, cplx>> ends;
    std::string failure;
    for (cplx start : {m.pixel_center(b.deep_i, b.deep_j), zc}) {
      try {
        ends = trace_pinches(delta, d, start, opt.max_period);
        break;
      } catch (const Error& e) {
        failure = e.what();
      }
    }
    if (!ends) {
      rep.note = failure;
      census.components.push_back(rep);
      continue;
    }
    {
      const auto [z_inf, z_zero] = *ends;
      rep.base_point = z_inf;
      rep.secondary_pinch = z_zero;
      bool pinch = std::abs(z_inf - z_zero) <= tol;
      rep.base_dyadic = nearest_dyadic(dyadics, z_inf, tol);
      if (!rep.base_dyadic) rep.base_dyadic = dyadic_root(z_inf, tol, opt.max_dyadic_depth, opt.max_root_order);
      bool dyadic = rep.base_dyadic.has_value();
      // Deeper pinch points are dyadic in J^m: L^m sends them to dyadic points of J_1.
      for (int lev = 1; lev < d && !dyadic; ++lev) {
        try {
          auto push = [&](cplx z) {
            for (int k = 0; k < lev; ++k) z = lavaurs_eval(delta, z);
            return z;
          };
          const cplx image = push(z_inf);
          const double stretch = std::abs(push(z_inf + px) - push(z_inf - px)) / 2.0;
          const double t = opt.match_pixels * std::max(stretch, px);
          dyadic = nearest_dyadic(dyadics, image, t).has_value() ||
                   dyadic_root(image, t, opt.max_dyadic_depth, opt.max_root_order).has_value();
        } catch (const Error&) {
        }
      }
      if (pinch && dyadic) {
        rep.croissant_class = CroissantClass::zero_croissant;
        if (d == 1) rep.label = EnrichedAngle({*rep.base_dyadic});
      } else {
        rep.note = pinch ? "pinch not at a dyadic point" : "two distinct pinch candidates";
      }
    }
    census.components.push_back(rep);
  }
  if (usable == 0 && !blobs.empty())
    throw Error(Err::ResolutionTooCoarse, "escape_census: every component is below the pixel floor");
  return census;
}

}  // namespace pimplode

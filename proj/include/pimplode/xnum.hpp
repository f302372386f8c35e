#pragma once

#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pimplode {

namespace bmp = boost::multiprecision;

using cplx = std::complex<double>;
using cx128 = bmp::cpp_complex<128, bmp::backends::digit_base_2>;
using cx256 = bmp::cpp_complex<256, bmp::backends::digit_base_2>;

template <class C>
using real_t = typename C::value_type;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kLog2 = 0.693147180559945309417232121458176568;

enum class Err {
  NoConvergence,
  DerivativeVanished,
  Indeterminate,
  OutsideDomain,
  ContinuationFailed,
  PrecisionExhausted,
  BranchUndefined,
  SheetViolation,
  WrongComponent,
  NotInPetal,
  NotInBasin,
  NotInSector,
  OutOfWindow,
  OrbitLeftBasin,
  SeedNotFound,
  NotStronglyNonescaping,
  BranchAmbiguous,
  ResolutionTooCoarse,
  ConfigInvalid,
  IoError,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err kind, const std::string& what);
  Err kind() const { return kind_; }

 private:
  Err kind_;
};

// Mantissa bits of the real type behind C.
template <class C>
constexpr int mantissa_bits() {
  return std::numeric_limits<real_t<C>>::digits;
}

template <class C>
double to_double(const real_t<C>& x) {
  return static_cast<double>(x);
}

template <class C>
cplx to_cplx(const C& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

template <class C>
C from_cplx(const cplx& z) {
  return C(real_t<C>(z.real()), real_t<C>(z.imag()));
}

template <class C>
real_t<C> pi_of() {
  if constexpr (std::is_same_v<real_t<C>, double>) {
    return kPi;
  } else {
    return boost::math::constants::pi<real_t<C>>();
  }
}

// Precision tiers selected from a requested mantissa width.
enum class Tier { d53, x128, x256 };

Tier tier_for_bits(int bits);
int tier_bits(Tier t);

// Bits to use when the smallest potential traced is min_potential.
int escalate_bits(int requested_bits, double min_potential);

// Calls fn with a value of the complex type matching the tier.
template <class Fn>
decltype(auto) with_tier(Tier t, Fn&& fn) {
  switch (t) {
    case Tier::x128:
      return fn(cx128{});
    case Tier::x256:
      return fn(cx256{});
    case Tier::d53:
    default:
      return fn(cplx{});
  }
}

// Newton iteration with a multiplicity-2 fallback when the steps decay
// linearly by one half.
template <class C, class F, class DF>
C newton_solve(F&& fn, DF&& dfn, C z, double tol, int max_iter) {
  using std::abs;
  using R = real_t<C>;
  const R rtol(tol);
  int mult = 1;
  int halving_hits = 0;
  R prev_step(-1);
  C fz = fn(z);
  C dz = dfn(z);
  for (int it = 0;; ++it) {
    const R af = abs(fz);
    if (af == R(0)) return z;
    const R ad = abs(dz);
    if (ad == R(0) || ad < af * std::numeric_limits<R>::epsilon()) {
      if (af <= rtol) return z;
      throw Error(Err::DerivativeVanished, "newton: derivative vanished");
    }
    C step = fz / dz;
    const R as = abs(step);
    if (af <= rtol && as <= rtol) return z;
    if (it >= max_iter) throw Error(Err::NoConvergence, "newton: max_iter reached");
    if (mult == 1 && prev_step > R(0)) {
      const R ratio = as / prev_step;
      if (ratio > R(0.4) && ratio < R(0.6)) {
        if (++halving_hits >= 2) mult = 2;
      } else {
        halving_hits = 0;
      }
    }
    prev_step = as;
    if (mult == 2) {
      // Keep the doubled step only while it lowers the residual.
      C trial = z - step * C(2);
      C ft = fn(trial);
      if (abs(ft) < af) {
        z = trial;
        fz = ft;
        dz = dfn(z);
        continue;
      }
      mult = 1;
      halving_hits = -4;
    }
    z = z - step;
    fz = fn(z);
    dz = dfn(z);
  }
}

// First-order forward-mode value.
template <class C>
struct Dual {
  C v;
  C d;
};

template <class C>
Dual<C> operator+(const Dual<C>& a, const Dual<C>& b) { return {a.v + b.v, a.d + b.d}; }
template <class C>
Dual<C> operator-(const Dual<C>& a, const Dual<C>& b) { return {a.v - b.v, a.d - b.d}; }
template <class C>
Dual<C> operator*(const Dual<C>& a, const Dual<C>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class C>
Dual<C> operator/(const Dual<C>& a, const Dual<C>& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
template <class C>
Dual<C> dlog(const Dual<C>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <class C>
Dual<C> dexp(const Dual<C>& a) {
  using std::exp;
  C e = exp(a.v);
  return {e, e * a.d};
}

// Exact dyadic rational num / 2^exp.
struct Dyadic {
  std::int64_t num = 0;
  std::uint32_t exp = 0;

  static Dyadic normalize(std::int64_t num, std::uint32_t exp);
  static Dyadic parse(const std::string& s);

  Dyadic doubled() const;
  Dyadic scaled(std::uint32_t k) const;
  Dyadic mod1() const;
  // Smallest m with 2^m * value an integer.
  std::uint32_t depth() const { return exp; }
  double value() const;

  template <class R>
  R value_as() const {
    R v(static_cast<double>(num));
    for (std::uint32_t i = 0; i < exp; ++i) v /= R(2);
    return v;
  }

  std::string str() const;
  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num == b.num && a.exp == b.exp;
  }
};

Dyadic dyadic_normalize(std::int64_t num, std::uint32_t exp);

// Decimal text with enough significant digits for the real type.
template <class R>
std::string fmt_num(const R& x) {
  std::ostringstream os;
  if constexpr (std::is_same_v<R, double>) {
    os.precision(17);
  } else {
    os.precision(std::numeric_limits<R>::digits10 + 2);
  }
  os << x;
  return os.str();
}

}  // namespace pimplode

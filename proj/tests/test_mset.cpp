#include "doctest.h"
#include "oracles.hpp"
#include "pimplode/mset.hpp"

#include <sstream>

using namespace pimplode;

TEST_CASE("green_M: values") {
  CHECK(green_M(cplx(1.0)) == 0.0);
  CHECK(green_M(cplx(4.0)) == 0.0);
  CHECK(oracle::iterate(cplx(4.0), cplx(-4.0), 1) == cplx(0.0));
  cplx lam(0.0, 1000.0);
  CHECK(std::abs(green_M(lam) - (2.0 * std::log(1000.0) - std::log(4.0))) < 1e-3);
  double prev = 0.0;
  for (double r : {1e3, 1e6, 1e12}) {
    double ratio = green_M(cplx(0.0, r)) / (2.0 * std::log(r));
    CHECK(ratio > prev);
    CHECK(ratio < 1.0);
    prev = ratio;
  }
  CHECK(prev > 0.94);
}

TEST_CASE("psi_M: round trip and defining relation") {
  for (double g : {0.05, 0.3, 1.0, 3.0}) {
    for (double t : {-0.4, -0.1, 0.0, 0.2, 0.45}) {
      cplx lam = psi_M<cplx>(g, t);
      CHECK(std::abs(green_M(lam) - g) < 1e-9);
      cplx om = bottcher_M(lam);
      CHECK(std::abs(om - std::exp(cplx(g, kTwoPi * t))) < 1e-8 * std::abs(om));
      CHECK(std::abs(bottcher_param(lam, g, t - std::floor(t)) - crit_value(lam)) < 1e-8);
    }
  }
}

TEST_CASE("psi_M: sheet and domain") {
  CHECK_THROWS_AS(psi_M<cplx>(0.5, 0.5), Error);
  CHECK_THROWS_AS(psi_M<cplx>(0.0, 0.1), Error);
  CHECK(psi_M<cplx>(0.5, 0.2).imag() > 0.0);
}

TEST_CASE("trace_param_ray: angle 0 runs along Re lambda = 1 toward the cusp") {
  auto poly = trace_param_ray<cplx>(0.0, 1.0, 1e-4, 12);
  double prev = 1e9;
  for (const auto& s : poly.samples) {
    CHECK(std::abs(s.point.real() - 1.0) < 1e-9);
    double dist = std::abs(s.point - 1.0);
    CHECK(dist < prev);
    prev = dist;
    CHECK(std::abs(green_M(s.point) - s.potential) < 1e-9);
  }
  CHECK(prev == doctest::Approx(0.391).epsilon(0.01));
}

TEST_CASE("trace_param_ray: wake boundary and midpoint rays") {
  WakeSpec w = wake_spec(1, 5);
  auto edge = trace_param_ray<cplx>(w.lo(), 1.0, 1e-3, 8);
  for (const auto& s : edge.samples) {
    double t = std::arg(bottcher_M(s.point)) / kTwoPi;
    t -= std::floor(t);
    CHECK(t >= w.lo() - 1e-9);
    CHECK(t <= w.hi() + 1e-9);
  }
  auto mid = trace_param_ray<cplx>(w.midpoint(), 1.0, 1e-3, 8);
  for (const auto& s : mid.samples) CHECK(wake_membership(s.point, w));
  CHECK_FALSE(wake_membership(psi_M<cplx>(0.1, 0.0), w));
}

TEST_CASE("wake_spec: boundary angles") {
  for (int q = 2; q <= 12; ++q) {
    WakeSpec w = wake_spec(1, q);
    const std::int64_t n = (std::int64_t{1} << q) - 1;
    CHECK(w.lo_num == 1);
    CHECK(w.hi_num == 2);
    for (std::int64_t k : {w.lo_num, w.hi_num}) CHECK(((k << q) % n) == k);
  }
  WakeSpec w25 = wake_spec(2, 5);
  const std::int64_t n = 31;
  CHECK(((w25.lo_num << 5) % n) == w25.lo_num);
  CHECK(w25.lo() > wake_spec(1, 3).hi());
  CHECK_THROWS_AS(wake_spec(2, 4), Error);
}

TEST_CASE("limb_center: small periods") {
  CHECK(std::abs(limb_center(1) - 2.0) < 1e-6);
  cplx l2 = limb_center(2);
  CHECK(std::abs(l2 - (1.0 - std::sqrt(5.0))) < 1e-12);
  cplx l3 = limb_center(3);
  CHECK(std::abs(l3 - cplx(-0.5527, 0.9596)) < 2e-4);
  // Rabbit center c = -0.12256 + 0.74486i under c = lambda/2 - lambda^2/4.
  cplx c = l3 / 2.0 - l3 * l3 / 4.0;
  CHECK(std::abs(c - cplx(-0.1225611668766536, 0.7448617666197442)) < 1e-12);
  CHECK_THROWS_AS(limb_center(0), Error);
}

TEST_CASE("limb_center: agrees with the c-plane oracle") {
  for (int q = 2; q <= 12; ++q) {
    cplx seed = (1.0 - 1.0 / (q * q)) * std::polar(1.0, kTwoPi / q);
    cplx ref = oracle::center_lambda(q, seed);
    cplx lam = limb_center(q);
    CHECK(std::abs(lam - ref) < 1e-9);
    // Superattracting: the critical point is periodic with period q.
    cplx z = crit_point(lam);
    CHECK(std::abs(oracle::iterate(lam, z, q) - z) < 1e-9);
  }
}

TEST_CASE("yoccoz_defect: values") {
  auto r5 = yoccoz_defect(std::polar(1.0, kTwoPi / 5.0), 1, 5);
  CHECK(r5.defect < 1e-14);
  auto r2 = yoccoz_defect(limb_center(2), 1, 2);
  CHECK(r2.defect == doctest::Approx(std::log(std::sqrt(5.0) - 1.0)).epsilon(1e-12));
  CHECK(r2.scaled == doctest::Approx(0.848).epsilon(0.02));
  CHECK(r2.scaled == 4.0 * r2.defect);
  auto r3 = yoccoz_defect(limb_center(3), 1, 3);
  CHECK(r3.scaled == doctest::Approx(0.92).epsilon(0.02));
  CHECK_THROWS_AS(yoccoz_defect(cplx(0.5, -0.1), 1, 3), Error);
  CHECK_THROWS_AS(yoccoz_defect(cplx(0.0), 1, 3), Error);
}

TEST_CASE("yoccoz_defect: classical inequality and scaled band") {
  double lo = 1e9, hi = 0.0;
  for (int q = 2; q <= 12; ++q) {
    auto r = yoccoz_defect(limb_center(q), 1, q);
    CHECK(r.yoccoz_ok);
    CHECK(r.defect >= 0.0);
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
  }
  CHECK(lo >= 0.3);
  CHECK(hi <= 3.0);
  CHECK(hi / lo <= 5.0);
}

TEST_CASE("wake_bound_rhs: values and limits") {
  double m = 31.0, g = std::ldexp(1.0, -10);
  CHECK(kTwoPi / (m * g) == doctest::Approx(207.6).epsilon(1e-3));
  CHECK(wake_bound_rhs(5, g) == doctest::Approx(kTwoPi * kLog2 / (5.0 * std::atan(kTwoPi / (m * g)))).epsilon(1e-15));
  CHECK(wake_bound_rhs(5, g) == doctest::Approx(0.5562).epsilon(1e-3));
  CHECK(wake_bound_rhs(5, 1e-12) == doctest::Approx(4.0 * kLog2 / 5.0).epsilon(1e-9));
  CHECK(wake_bound_rhs(5, 1e6) > 1e4);
  CHECK(wake_bound_rhs(5, 1.0) < wake_bound_rhs(5, 2.0));
}

TEST_CASE("wake bound at the midpoint angle") {
  for (int q : {5, 8}) {
    double g = std::ldexp(1.0, -2 * q);
    WakeSpec w = wake_spec(1, q);
    cplx lam = psi_M<cplx>(g, w.midpoint());
    CHECK(wake_membership(lam, w));
    CHECK(within_wake_bound(lam, q, g));
    CHECK(yoccoz_defect(lam, 1, q).defect < wake_bound_rhs(q, g));
  }
}

TEST_CASE("defect csv") {
  std::ostringstream os;
  write_defect_csv(os, {yoccoz_defect(limb_center(2), 1, 2)});
  CHECK(os.str().rfind("q,lambda_re,lambda_im,defect,scaled_defect,potential\n2,", 0) == 0);
}

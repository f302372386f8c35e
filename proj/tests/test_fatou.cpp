#include "doctest.h"
#include "oracles.hpp"
#include "pimplode/fatou.hpp"

#include <random>

using namespace pimplode;

namespace {

cplx f1(cplx z) { return z + z * z; }

// Points of the attracting petal: Re(-1/z) > 25 inside the sector |Im u| < Re u / 2.
std::vector<cplx> petal_samples(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(25.0, 200.0), ang(-0.45, 0.45);
  std::vector<cplx> out;
  for (int i = 0; i < n; ++i) {
    double r = re(rng);
    cplx u(r, r * ang(rng));
    out.push_back(-1.0 / u);
  }
  return out;
}

}  // namespace

TEST_CASE("series coefficients solve the Abel equation in the u chart") {
  const auto& b = fatou_series_coeffs();
  REQUIRE(b.size() >= 17);
  for (cplx u : {cplx(60.0, 5.0), cplx(100.0, -30.0), cplx(400.0, 0.0)}) {
    cplx next = u * u / (u - 1.0);
    double err = std::abs(detail::series_attr(next) - detail::series_attr(u) - 1.0);
    CHECK(err < 1e-13);
  }
}

TEST_CASE("phi_attr: normalization and Abel equation") {
  CHECK(std::abs(phi_attr(cplx(-0.25)) - 1.0) < 1e-12);
  cplx z = -0.25;
  for (int i = 0; i < 10; ++i) z = f1(z);
  CHECK(std::abs(phi_attr(z) - 11.0) < 1e-10);
  double worst = 0.0;
  for (cplx p : petal_samples(100, 1)) worst = std::max(worst, std::abs(phi_attr(f1(p)) - phi_attr(p) - 1.0));
  CHECK(worst <= 1e-8);
  CHECK_THROWS_AS(phi_attr(cplx(0.0)), Error);
}

TEST_CASE("phi_attr: orbit limit agrees with the series") {
  for (cplx p : petal_samples(5, 2)) {
    cplx series = phi_attr(p);
    double acc = std::abs(phi_attr_limit(p, 1e4, true) - series);
    double raw = std::abs(phi_attr_limit(p, 1e4, false) - series);
    CHECK(acc < 1e-8);
    CHECK(acc * 10.0 < raw);
  }
}

TEST_CASE("phi_attr_inv: round trip") {
  for (cplx v : {cplx(1.0), cplx(-3.0, 2.0), cplx(10.0, -5.0), cplx(0.5, 0.5)}) {
    cplx z = phi_attr_inv(v);
    CHECK(std::abs(rho1(z) - v) < 1e-10);
  }
}

TEST_CASE("phi_rep: repelling Abel equation") {
  for (cplx z : {cplx(0.02, 0.001), cplx(0.01, -0.003), cplx(0.015, 0.0)}) {
    CHECK(std::abs(phi_rep(f1(z)) - phi_rep(z) - 1.0) < 1e-8);
    CHECK(std::abs(chi1(phi_rep(z)) - z) < 1e-10);
  }
}

TEST_CASE("basin test") {
  CHECK(basin_test(cplx(-0.25)).status == BasinStatus::in_basin);
  CHECK(basin_test(cplx(1.0)).status == BasinStatus::escapes);
  CHECK(basin_test(cplx(-0.5, 0.3)).status == BasinStatus::in_basin);
  BasinPoint b = basin_test(cplx(-0.25));
  cplx z = -0.25;
  for (long i = 0; i < b.steps_to_petal; ++i) z = f1(z);
  CHECK(std::abs(z - b.z) < 1e-15);
  cplx u = -1.0 / b.z;
  CHECK(u.real() > 20.0);
  CHECK(std::abs(u.imag()) < u.real());
}

TEST_CASE("rho1: normalization") {
  CHECK(std::abs(rho1(cplx(-0.25)) - 1.0) < 1e-8);
  CHECK(std::abs(rho1(cplx(-0.5))) < 1e-8);
  CHECK_THROWS_AS(rho1(cplx(1.0)), Error);
  try {
    rho1(cplx(0.5));
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NotInBasin);
  }
}

TEST_CASE("rho1: iterated Abel equation") {
  for (cplx z : {cplx(-0.3, 0.2), cplx(-0.6, 0.1), cplx(-0.1, -0.3), cplx(-1.1, 0.1)}) {
    cplx r = rho1(z), x = z;
    for (int n = 1; n <= 20; ++n) {
      x = f1(x);
      CHECK(std::abs(rho1(x) - r - static_cast<double>(n)) < 1e-9);
    }
  }
}

TEST_CASE("chi1: translation equivariance") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> re(-2.0, 2.0), im(3.0, 6.0);
  for (int i = 0; i < 50; ++i) {
    cplx w(re(rng), im(rng));
    CHECK(std::abs(chi1(w + 1.0) - f1(chi1(w))) <= 1e-8);
  }
}

TEST_CASE("chi1: decay toward the parabolic point") {
  double prev = 1e9;
  for (double y : {5.0, 10.0, 20.0, 40.0, 80.0}) {
    double m = std::abs(chi1(cplx(0.0, y)));
    CHECK(m < prev);
    prev = m;
    CHECK(m * y == doctest::Approx(0.83).epsilon(0.1));
  }
  CHECK(std::abs(chi1(cplx(0.0, 10.0))) == doctest::Approx(0.083).epsilon(0.02));
}

TEST_CASE("chi1: conjugation symmetry and the escaping axis") {
  for (cplx v : {cplx(0.3, 0.7), cplx(-1.2, 2.0), cplx(0.0, -1.0)}) {
    cplx a = chi1(std::conj(v) - cplx(0.0, kTwoPi));
    CHECK(std::abs(a - std::conj(chi1(v))) < 1e-10);
  }
  ChiValue c0 = chi1_full(cplx(0.0, -kPi));
  CHECK(std::abs(c0.z.imag()) < 1e-10);
  CHECK(c0.z.real() > 0.0);
  for (double x : {-1.0, 1.0, 2.0}) {
    double g = chi1_full(cplx(x, -kPi)).potential;
    CHECK(g == doctest::Approx(c0.potential * std::exp2(x)).epsilon(1e-12));
  }
  for (double x : {-0.5, 0.5, 1.25}) {
    double g = chi1_full(cplx(x, -kPi)).potential;
    CHECK(g == doctest::Approx(oracle::green(cplx(1.0), chi1(cplx(x, -kPi)))).epsilon(1e-9));
  }
  CHECK(c0.potential == doctest::Approx(4.01067).epsilon(1e-5));
}

TEST_CASE("perturbed chart: normalization and the two views") {
  cplx lam = std::exp(cplx(0.0, kTwoPi) * std::polar(0.02, kPi / 8.0));
  PerturbedChart ch(lam);
  CHECK(std::abs(ch.sigma() - (1.0 - lam)) < 1e-15);
  CHECK(std::abs(ch.phi(crit_value(lam)) - 1.0) < 1e-10);
  CHECK(std::abs(ch.rho(crit_value(lam)) - 1.0) < 1e-10);
  for (cplx z : {cplx(-0.3, 0.2), cplx(-0.1, -0.05), cplx(-0.2, 0.0)}) {
    CHECK(std::abs(ch.phi_plus(z) - (ch.phi(z) - 1.0 / ch.alpha())) < 1e-12);
  }
  CHECK(std::abs(rho_pert(lam, crit_value(lam)) - 1.0) < 1e-10);
}

TEST_CASE("perturbed chart: sector and window errors") {
  CHECK_THROWS_AS(PerturbedChart(cplx(0.9, -0.1)), Error);
  try {
    PerturbedChart ch(std::exp(cplx(0.0, kTwoPi) * std::polar(0.2, 0.1)));
    FAIL("expected NotInSector");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NotInSector);
  }
}

TEST_CASE("perturbed chart: Abel equation of chi") {
  cplx lam = std::exp(cplx(0.0, kTwoPi) * std::polar(0.01, kPi / 8.0));
  PerturbedChart ch(lam);
  for (cplx w : {cplx(0.3, 1.0), cplx(-0.5, 2.0), cplx(0.1, 1.5)}) {
    CHECK(std::abs(ch.chi(w + 1.0) - eval_f(lam, ch.chi(w))) <= 1e-6);
    CHECK(std::abs(chi_pert(lam, w) - ch.chi(w)) < 1e-12);
  }
}

TEST_CASE("perturbed chart: convergence to the parabolic coordinates") {
  const cplx pts[] = {cplx(-0.3, 0.2), cplx(-0.6, 0.1), cplx(-0.1, -0.3), cplx(0.1, 0.4), cplx(-0.2, -0.05)};
  const cplx ws[] = {cplx(0.3, 1.0), cplx(-0.5, 2.0), cplx(0.1, 1.5), cplx(0.7, 0.8), cplx(-0.2, 3.0)};
  double prev_rho = 1e9, prev_chi = 1e9;
  for (double t : {0.01, 0.005, 0.0025}) {
    cplx lam = std::exp(cplx(0.0, kTwoPi) * std::polar(t, kPi / 8.0));
    PerturbedChart ch(lam);
    double er = 0.0, ec = 0.0;
    for (cplx z : pts) er = std::max(er, std::abs(ch.rho(z) - rho1(z)));
    for (cplx w : ws) ec = std::max(ec, std::abs(ch.chi(w) - chi1(w)));
    CHECK(er < prev_rho);
    CHECK(ec < prev_chi);
    prev_rho = er;
    prev_chi = ec;
  }
  CHECK(prev_rho < 0.2);
  CHECK(prev_chi < 0.01);
}

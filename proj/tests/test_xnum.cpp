#include "doctest.h"
#include "pimplode/xnum.hpp"

#include <random>

using namespace pimplode;

TEST_CASE("newton: simple root") {
  auto r = newton_solve([](cplx z) { return z * z - 4.0; }, [](cplx z) { return 2.0 * z; }, cplx(3.0), 1e-13, 50);
  CHECK(std::abs(r - 2.0) < 1e-12);
}

TEST_CASE("newton: double root of the period-one center equation") {
  // f(cv) - cv = lam^2/4 (lam^2/4 - lam + 1) - ... reduces to (lam - 2)^2 up to a factor.
  auto f = [](cplx l) { return l * l - 4.0 * l + 4.0; };
  auto df = [](cplx l) { return 2.0 * l - 4.0; };
  auto r = newton_solve(f, df, cplx(1.9), 1e-13, 200);
  CHECK(std::abs(r - 2.0) < 1e-6);
}

TEST_CASE("newton: linear map in one step") {
  auto r = newton_solve([](cplx z) { return z; }, [](cplx) { return cplx(1.0); }, cplx(5.0), 1e-14, 1);
  CHECK(std::abs(r) == 0.0);
}

TEST_CASE("newton: errors") {
  CHECK_THROWS_AS(newton_solve([](cplx z) { return z * z + 1.0; }, [](cplx z) { return 2.0 * z; }, cplx(0.5), 1e-14, 3),
                  Error);
  try {
    newton_solve([](cplx) { return cplx(1.0); }, [](cplx) { return cplx(0.0); }, cplx(1.0), 1e-14, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::DerivativeVanished);
  }
}

TEST_CASE("newton: square roots in the unit disk") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double tol = 1e-12;
  int done = 0;
  while (done < 1000) {
    cplx c(u(rng), u(rng));
    if (std::abs(c) >= 1.0 || std::abs(c) < 1e-6) continue;
    auto r = newton_solve([c](cplx z) { return z * z - c; }, [](cplx z) { return 2.0 * z; }, c, tol, 200);
    CHECK(std::abs(r * r - c) <= tol);
    ++done;
  }
}

TEST_CASE("newton: extended precision") {
  cx128 z0(real_t<cx128>(3));
  auto r = newton_solve([](const cx128& z) { return z * z - cx128(2); }, [](const cx128& z) { return cx128(2) * z; },
                        z0, 1e-35, 100);
  real_t<cx128> err = abs(r.real() - boost::multiprecision::sqrt(real_t<cx128>(2)));
  CHECK(static_cast<double>(err) < 1e-35);
}

TEST_CASE("dyadic: normalize") {
  CHECK(Dyadic::normalize(4, 3) == Dyadic{1, 1});
  CHECK(Dyadic::normalize(0, 7) == Dyadic{0, 0});
  CHECK(Dyadic::normalize(-6, 2) == Dyadic{-3, 1});
  CHECK(dyadic_normalize(12, 4).str() == "3/4");
}

TEST_CASE("dyadic: doubling and mod 1") {
  Dyadic three{3, 0};
  CHECK(three.doubled() == Dyadic{6, 0});
  CHECK(three.mod1() == Dyadic{0, 0});
  CHECK(Dyadic::parse("3/8").doubled() == Dyadic{3, 2});
  CHECK(Dyadic::parse("7/4").mod1() == Dyadic{3, 2});
  CHECK(Dyadic::parse("-1/4").mod1() == Dyadic{3, 2});
  CHECK(Dyadic::parse("5/16").scaled(3) == Dyadic{5, 1});
  CHECK(Dyadic::parse("5/16").depth() == 4);
  CHECK(Dyadic::parse("5/16").value() == 0.3125);
}

TEST_CASE("dyadic: parse") {
  CHECK(Dyadic::parse("1/2") == Dyadic{1, 1});
  CHECK(Dyadic::parse("2") == Dyadic{2, 0});
  CHECK(Dyadic::parse("6/8") == Dyadic{3, 2});
  CHECK_THROWS_AS(Dyadic::parse("1/3"), Error);
}

TEST_CASE("dyadic: reduced form is a fixed point of scaling up") {
  for (std::int64_t n = -40; n <= 40; ++n) {
    for (std::uint32_t e = 0; e < 10; ++e) {
      Dyadic d = Dyadic::normalize(n, e);
      CHECK((d.num % 2 != 0 || d.exp == 0));
      CHECK(Dyadic::normalize(d.num * 2, d.exp + 1) == d);
      CHECK(d.value() == std::ldexp(static_cast<double>(n), -static_cast<int>(e)));
    }
  }
}

TEST_CASE("precision tiers") {
  CHECK(tier_for_bits(53) == Tier::d53);
  CHECK(tier_for_bits(100) == Tier::x128);
  CHECK(tier_for_bits(256) == Tier::x256);
  CHECK_THROWS_AS(tier_for_bits(300), Error);
  CHECK(escalate_bits(53, 1e-3) == 53);
  CHECK(escalate_bits(53, std::ldexp(1.0, -40)) >= 128);
  CHECK(mantissa_bits<cx128>() >= 128);
  CHECK(with_tier(Tier::x256, [](auto z) { return mantissa_bits<decltype(z)>(); }) >= 256);
}

#include "pimplode/renorm.hpp"

#include <cmath>

namespace pimplode {

cplx exp_coord(cplx w) { return std::exp(cplx(0.0, kTwoPi) * w); }

cplx exp_coord_inv(cplx zeta, std::optional<long> sheet) {
  if (zeta == cplx(0.0, 0.0)) throw Error(Err::OutsideDomain, "Exp inverse: zeta = 0");
  if (!sheet && zeta.imag() == 0.0 && zeta.real() < 0.0)
    throw Error(Err::BranchAmbiguous, "Exp inverse: zeta on the cut, sheet unspecified");
  cplx w = std::log(zeta) / cplx(0.0, kTwoPi);
  if (w.real() <= -0.5) w += 1.0;
  return w + static_cast<double>(sheet.value_or(0));
}

HornValue horn(cplx w) {
  try {
    return {w, rho1(chi1(w))};
  } catch (const Error& e) {
    if (e.kind() == Err::NotInBasin || e.kind() == Err::Indeterminate || e.kind() == Err::PrecisionExhausted)
      throw Error(Err::NotInBasin, std::string("horn: ") + e.what());
    throw;
  }
}

cplx parab_renorm(cplx zeta) {
  if (zeta == cplx(0.0, 0.0)) return zeta;
  try {
    return exp_coord(horn(exp_coord_inv(zeta, 0)).value);
  } catch (const Error& e) {
    throw Error(Err::OutsideDomain, std::string("parab_renorm: ") + e.what());
  }
}

namespace {

// Evaluates on the unit strip 0 <= Re w < 1 and translates back.
cplx horn_on_strip(const PerturbedChart& ch, cplx w) {
  double k = std::floor(w.real());
  return ch.rho(ch.chi(w - k)) + k;
}

}  // namespace

cplx horn_pert(cplx lam, cplx w, double r0) {
  return horn_on_strip(PerturbedChart(lam, r0), w);
}

cplx renorm_pert(cplx lam, cplx zeta, double r0) {
  PerturbedChart ch(lam, r0);
  if (zeta == cplx(0.0, 0.0)) return zeta;
  cplx w = exp_coord_inv(zeta, 0) - 1.0 / ch.alpha();
  try {
    return exp_coord(horn_on_strip(ch, w));
  } catch (const Error& e) {
    if (e.kind() == Err::NotInSector) throw;
    throw Error(Err::OutsideDomain, std::string("renorm_pert: ") + e.what());
  }
}

namespace {

// k-th Taylor coefficient times k! of fn at 0, from the trapezoid rule on |zeta| = r.
template <class Fn>
cplx cauchy(Fn&& fn, double r, int k, int nodes) {
  cplx sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    cplx zeta = std::polar(r, kTwoPi * (j + 0.5) / nodes);
    sum += fn(zeta) / std::pow(zeta, k);
  }
  return std::tgamma(k + 1.0) * sum / static_cast<double>(nodes);
}

}  // namespace

RenormDerivs renorm_derivs(double radius, double radius_check, int nodes) {
  if (!(radius > 0.0) || !(radius_check > 0.0) || nodes < 8)
    throw Error(Err::ConfigInvalid, "renorm_derivs: bad radii or node count");
  RenormDerivs d;
  try {
    d.d1 = cauchy(parab_renorm, radius, 1, nodes);
    d.d2 = cauchy(parab_renorm, radius, 2, nodes);
    d.d2_check = cauchy(parab_renorm, radius_check, 2, nodes);
  } catch (const Error& e) {
    throw Error(Err::PrecisionExhausted, std::string("renorm_derivs: ") + e.what());
  }
  return d;
}

cplx renorm_pert_multiplier(cplx lam, double radius, int nodes, double r0) {
  PerturbedChart ch(lam, r0);
  const cplx inv_a = 1.0 / ch.alpha();
  auto r = [&](cplx zeta) { return exp_coord(horn_on_strip(ch, exp_coord_inv(zeta, 0) - inv_a)); };
  return cauchy(r, radius, 1, nodes);
}

SectorCheck alpha_q_sector(cplx lam, int q, double r1) {
  SectorCheck s;
  s.q = q;
  s.alpha_q = static_cast<double>(q) - 1.0 / alpha(lam);
  double m = std::abs(s.alpha_q);
  s.in_sector = m > 0.0 && m < r1 && std::abs(std::arg(s.alpha_q)) < kPi / 4;
  return s;
}

bool validate_eta0(double eta0, int samples) {
  for (double y : {eta0, -eta0 - kTwoPi}) {
    for (int j = 0; j < samples; ++j) {
      cplx w(static_cast<double>(j) / samples, y);
      try {
        cplx h = horn(w).value;
        if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) return false;
      } catch (const Error&) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace pimplode

#pragma once

#include "pimplode/fatou.hpp"

#include <optional>

namespace pimplode {

// e^{2 pi i w}.
cplx exp_coord(cplx w);
// Preimage with real part in (sheet - 1/2, sheet + 1/2]; without a sheet the
// negative real axis is rejected.
cplx exp_coord_inv(cplx zeta, std::optional<long> sheet = std::nullopt);

struct HornValue {
  cplx w;
  cplx value;
};

HornValue horn(cplx w);
cplx parab_renorm(cplx zeta);

// H_lambda = rho_lambda o chi_lambda.
cplx horn_pert(cplx lam, cplx w, double r0 = 0.05);
cplx renorm_pert(cplx lam, cplx zeta, double r0 = 0.05);

struct RenormDerivs {
  cplx d1;
  cplx d2;
  // Second derivative from the secondary radius.
  cplx d2_check;
};

// Cauchy integrals of R_1 on two circles.
RenormDerivs renorm_derivs(double radius = 1e-2, double radius_check = 5e-3, int nodes = 128);

// Multiplier check: mean of R_lambda(zeta)/zeta on a circle of the given radius.
cplx renorm_pert_multiplier(cplx lam, double radius = 1e-8, int nodes = 16, double r0 = 0.05);

struct SectorCheck {
  int q = 0;
  cplx alpha_q;
  bool in_sector = false;
};

SectorCheck alpha_q_sector(cplx lam, int q, double r1 = 0.1);

// Samples H_1 on Im w = eta and on the mirror line Im w = -eta - 2 pi.
bool validate_eta0(double eta0 = 2.0, int samples = 8);

}  // namespace pimplode

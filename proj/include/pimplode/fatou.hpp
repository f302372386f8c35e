#pragma once

#include "pimplode/quadmap.hpp"

#include <vector>

namespace pimplode {

// Coefficients of u - log u + sum b_k u^{-k}, the formal Fatou coordinate of
// u -> u^2/(u-1), the map f_1 in the chart u = -1/z.
const std::vector<double>& fatou_series_coeffs();

// Petal radius in the u chart beyond which the series is used.
inline constexpr double kSeriesRadius = 40.0;

namespace detail {
cplx series_attr(cplx u);
cplx series_rep(cplx u);
cplx series_deriv(cplx u);
// Log with argument in (0, 2 pi).
cplx log_upper(cplx u);
}  // namespace detail

enum class BasinStatus { in_basin, escapes, indeterminate };

struct BasinPoint {
  BasinStatus status = BasinStatus::indeterminate;
  cplx z;
  long steps_to_petal = 0;
};

// Orbit entry into {Re u > 20, |Im u| < Re u} within the horizon; escape past radius 4.
BasinPoint basin_test(cplx z, long horizon = 100000);

// Additive constant fixing phi(cv_1) = 1.
cplx attr_constant();

cplx phi_attr(cplx z);
// Limit form u_n - n - log u_n with one Richardson step between |u| = stop and 2 stop.
cplx phi_attr_limit(cplx z, double stop = 1e4, bool richardson = true);
cplx phi_rep(cplx z);

cplx rho1(cplx z);

// Point of the attracting petal with phi_attr = v.
cplx phi_attr_inv(cplx v);

struct ChiValue {
  cplx z;
  bool escaped = false;
  // Green potential; left at 0 for unescaped orbits when not settled.
  double potential = 0.0;
};

ChiValue chi1_full(cplx w, int extra_depth = 0, bool settle = true);
cplx chi1(cplx w, int extra_depth = 0);

class PerturbedChart {
 public:
  PerturbedChart(cplx lam, double r0 = 0.05);

  cplx lambda() const { return lam_; }
  cplx alpha() const { return alpha_; }
  cplx sigma() const { return sigma_; }
  cplx normalization() const { return c_; }

  // Attracting view; the repelling view is phi() - 1/alpha.
  cplx phi(cplx z) const;
  cplx phi_plus(cplx z) const;
  cplx rho(cplx z) const;
  cplx chi(cplx w) const;
  // Inverse of phi near the exit of the strip.
  cplx phi_inv(cplx v) const;

 private:
  struct Eval {
    cplx value;
    cplx deriv;
  };
  Eval raw(cplx z, bool with_deriv) const;
  cplx chart(cplx z) const;
  cplx defect(cplx z) const;

  cplx lam_, alpha_, sigma_, log_rep_, tail_slope_, c_;
  double window_ = 0.0;
};

cplx rho_pert(cplx lam, cplx z, double r0 = 0.05);
cplx chi_pert(cplx lam, cplx w, double r0 = 0.05);

}  // namespace pimplode

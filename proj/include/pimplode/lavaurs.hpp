#pragma once

#include "pimplode/fatou.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pimplode {

// Finite sequence of dyadics; the first entry is taken mod 1.
class EnrichedAngle {
 public:
  EnrichedAngle() = default;
  explicit EnrichedAngle(std::vector<Dyadic> entries);

  static EnrichedAngle parse(const std::string& s);

  std::size_t depth() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Dyadic>& entries() const { return entries_; }
  const Dyadic& operator[](std::size_t i) const { return entries_[i]; }

  // Drops the first entry.
  EnrichedAngle ceil() const;
  // Drops the last entry.
  EnrichedAngle floor() const;
  EnrichedAngle scaled(std::int64_t x) const;

  std::string str() const;

  friend bool operator==(const EnrichedAngle& a, const EnrichedAngle& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Dyadic> entries_;
};

// chi_1(rho_1(z) + delta).
cplx lavaurs_eval(cplx delta, cplx z);

// L^{n-1} o L_{delta+m}; f_1^m when n = 0.
cplx mixed_orbit(cplx delta, int n, long m, cplx z);

struct NonescapeClass {
  cplx delta;
  int d = 0;
  double g = 0.0;
  bool strong = false;
};

// One record per level until the critical orbit leaves the basin.
std::vector<NonescapeClass> nonescape_class(cplx delta, int d_max);

namespace detail {
// Potential of f_1 at chi_1(-pi i); chi_1(x - pi i) is real with potential K 2^x.
double chi_axis_potential();
// v with chi_1(v) = psi_1(w) on the branch continued from the axis Im v = -pi.
cplx lavaurs_level(cplx w);
// Root of f_1^m(z) = y continued from the branch through the orbit of anchor.
cplx pull_back(cplx y, cplx anchor, int m);
}  // namespace detail

// Boettcher-Lavaurs parameter of the invariant component attached at 0;
// w = potential + 2 pi i angle with the angle taken in R.
cplx psi_lavaurs0(cplx delta, cplx w);
// Same at potential 2^shift * Re w, for shifts beyond double range.
cplx psi_lavaurs0_shifted(cplx delta, cplx w, double shift);

// Depth 0 and 1 are anchored at dyadic points; deeper labels need a seed point
// inside the component.
cplx psi_lavaurs(cplx delta, const EnrichedAngle& theta, cplx w, std::optional<cplx> seed = std::nullopt);

// psi_lambda(w / 2^{dk} + 2 pi i sum theta_m / 2^{mk}).
template <class C>
C imploded_bottcher(const C& lam, int k, const EnrichedAngle& theta, real_t<C> potential, real_t<C> angle) {
  using R = real_t<C>;
  const std::size_t d = theta.depth();
  R scale(1);
  for (std::size_t i = 0; i < d * static_cast<std::size_t>(k); ++i) scale /= R(2);
  R a = angle * scale;
  for (std::size_t m = 0; m < d; ++m) {
    R t = theta[m].template value_as<R>();
    for (std::size_t i = 0; i < m * static_cast<std::size_t>(k); ++i) t /= R(2);
    a += t;
  }
  R p = potential * scale;
  if (!(p > R(0))) throw Error(Err::OutsideDomain, "imploded_bottcher: potential must be positive");
  if (p < detail::potential_floor<R>()) throw Error(Err::PrecisionExhausted, "imploded_bottcher: potential below floor");
  using std::floor;
  a -= floor(a);
  return bottcher_param(lam, p, a);
}

struct ClipBound {
  int level = 0;
  double potential = 0.0;
};

struct EnrichedRaySegment {
  EnrichedAngle theta;
  double theta_last = 0.0;
  std::vector<int> levels;
  // One chain per level, from high potential to low.
  std::vector<std::vector<cplx>> pieces;
  double gluing_error = 0.0;
};

// Pieces Psi_{(theta_0..theta_{m-1})}([.] + 2 pi i theta_m) for m = from.level
// down to to.level; potential infinity is represented by the base point.
EnrichedRaySegment enriched_ray(cplx delta, const EnrichedAngle& theta, double theta_last, ClipBound from,
                                ClipBound to, int n_samples);

// Tri-state pixel classes for escape masks.
enum class PixelClass : unsigned char { out = 0, unclassified = 128, certified = 255 };

struct Window {
  double re_min = -1.6, re_max = 0.4, im_min = -0.8, im_max = 0.8;
};

struct EscapeMask {
  Window window;
  int width = 0;
  int height = 0;
  std::vector<PixelClass> cls;
  // Potential of the image under L^d, NaN unless certified.
  std::vector<double> potential;
  cplx pixel_center(int i, int j) const;
  double pixel_size() const;
};

EscapeMask escape_mask(cplx delta, int d, double g, const Window& window, int resolution, int threads = 0);

enum class CroissantClass { zero_croissant, jordan, other };

struct ComponentReport {
  int level_d = 0;
  std::optional<EnrichedAngle> label;
  std::optional<cplx> base_point;
  std::optional<cplx> secondary_pinch;
  CroissantClass croissant_class = CroissantClass::other;
  std::string note;
  long pixel_area = 0;
  bool clipped = false;
  // Dyadic angle of the landing point matched to the base point.
  std::optional<Dyadic> base_dyadic;
};

struct CensusOptions {
  // Depth of the tabulated landing points; deeper orders up to max_root_order
  // are matched by Newton on f_1^k = 0.
  int max_dyadic_depth = 10;
  int max_root_order = 24;
  double match_pixels = 2.0;
  int min_pixels = 4;
  int max_period = 24;
  int threads = 0;
};

struct Census {
  EscapeMask mask;
  std::vector<ComponentReport> components;
  long too_small = 0;
};

Census escape_census(cplx delta, int d, double g, const Window& window, int resolution,
                     const CensusOptions& opt = {});

const char* to_string(CroissantClass c);

}  // namespace pimplode

#include "pimplode/xnum.hpp"

#include <algorithm>

namespace pimplode {

const char* err_name(Err e) {
  switch (e) {
    case Err::NoConvergence: return "NoConvergence";
    case Err::DerivativeVanished: return "DerivativeVanished";
    case Err::Indeterminate: return "Indeterminate";
    case Err::OutsideDomain: return "OutsideDomain";
    case Err::ContinuationFailed: return "ContinuationFailed";
    case Err::PrecisionExhausted: return "PrecisionExhausted";
    case Err::BranchUndefined: return "BranchUndefined";
    case Err::SheetViolation: return "SheetViolation";
    case Err::WrongComponent: return "WrongComponent";
    case Err::NotInPetal: return "NotInPetal";
    case Err::NotInBasin: return "NotInBasin";
    case Err::NotInSector: return "NotInSector";
    case Err::OutOfWindow: return "OutOfWindow";
    case Err::OrbitLeftBasin: return "OrbitLeftBasin";
    case Err::SeedNotFound: return "SeedNotFound";
    case Err::NotStronglyNonescaping: return "NotStronglyNonescaping";
    case Err::BranchAmbiguous: return "BranchAmbiguous";
    case Err::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case Err::ConfigInvalid: return "ConfigInvalid";
    case Err::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Err kind, const std::string& what)
    : std::runtime_error(std::string(err_name(kind)) + ": " + what), kind_(kind) {}

Tier tier_for_bits(int bits) {
  if (bits <= 53) return Tier::d53;
  if (bits <= 128) return Tier::x128;
  if (bits <= 256) return Tier::x256;
  throw Error(Err::ConfigInvalid, "precision above 256 bits is not supported");
}

int tier_bits(Tier t) {
  switch (t) {
    case Tier::x128: return 128;
    case Tier::x256: return 256;
    case Tier::d53:
    default: return 53;
  }
}

int escalate_bits(int requested_bits, double min_potential) {
  if (min_potential < 1e-10) return std::max(requested_bits, 128);
  return requested_bits;
}

Dyadic Dyadic::normalize(std::int64_t num, std::uint32_t exp) {
  if (num == 0) return {0, 0};
  while (exp > 0 && (num % 2) == 0) {
    num /= 2;
    --exp;
  }
  return {num, exp};
}

Dyadic dyadic_normalize(std::int64_t num, std::uint32_t exp) {
  return Dyadic::normalize(num, exp);
}

Dyadic Dyadic::parse(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return normalize(std::stoll(s), 0);
  std::int64_t n = std::stoll(s.substr(0, slash));
  std::int64_t d = std::stoll(s.substr(slash + 1));
  if (d <= 0 || (d & (d - 1)) != 0) throw Error(Err::ConfigInvalid, "not a dyadic: " + s);
  std::uint32_t e = 0;
  while ((std::int64_t{1} << e) < d) ++e;
  return normalize(n, e);
}

Dyadic Dyadic::doubled() const {
  if (exp == 0) return {num * 2, 0};
  return normalize(num, exp - 1);
}

Dyadic Dyadic::scaled(std::uint32_t k) const {
  Dyadic d = *this;
  for (std::uint32_t i = 0; i < k; ++i) d = d.doubled();
  return d;
}

Dyadic Dyadic::mod1() const {
  if (exp == 0) return {0, 0};
  const std::int64_t den = std::int64_t{1} << exp;
  std::int64_t r = num % den;
  if (r < 0) r += den;
  return normalize(r, exp);
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -static_cast<int>(exp)); }

std::string Dyadic::str() const {
  if (exp == 0) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(std::int64_t{1} << exp);
}

}  // namespace pimplode

// Acceptance gate: one PASS/FAIL line per criterion.
#include "pimplode/expcli.hpp"
#include "pimplode/mset.hpp"
#include "pimplode/renorm.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace pimplode;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

fs::path out_root() { return fs::temp_directory_path() / "pimplode-acceptance"; }

RunReport run(const std::string& experiment, nlohmann::json params, const std::string& tag, int precision = 53) {
  nlohmann::json j = {{"experiment", experiment},
                      {"params", std::move(params)},
                      {"out_dir", (out_root() / tag).string()},
                      {"precision", precision}};
  return run_experiment(parse_config(j));
}

const CheckResult* find_check(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

// Requires every named check to be present and passing.
Outcome require_checks(const RunReport& r, std::initializer_list<const char*> names) {
  Outcome o{r.row_errors.empty(), ""};
  for (const char* n : names) {
    const CheckResult* c = find_check(r, n);
    o.pass = o.pass && c && c->passed;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + n + (c ? (c->passed ? " ok" : " failed") : " missing");
    if (c) o.detail += " (" + c->detail + ")";
  }
  if (!r.row_errors.empty()) o.detail += "; " + std::to_string(r.row_errors.size()) + " row errors";
  return o;
}

std::vector<double> csv_column(const fs::path& path, std::size_t col) {
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  std::vector<double> out;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ss, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

std::string joined(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + num(x);
  return s;
}

Outcome functional_equations() {
  const cplx lams[] = {cplx(1.0), cplx(0.0, 1.0), cplx(0.5, 0.5), std::polar(0.9, 2.0)};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lp(std::log(1e-2), 0.0), ang(0.0, 1.0);
  double eg = 0.0, eb = 0.0, ep = 0.0, er = 0.0;
  int n = 0;
  for (int i = 0; i < 1000; ++i) {
    const cplx lam = lams[i % 4];
    const double g = std::exp(lp(rng)), t = ang(rng);
    const cplx z = bottcher_param(lam, g, t);
    const cplx fz = eval_f(lam, z);
    const cplx w = bottcher(lam, z);
    eg = std::max(eg, std::abs(green(lam, fz) - 2.0 * green(lam, z)));
    eb = std::max(eb, std::abs(bottcher(lam, fz) - w * w));
    const double t2 = std::fmod(2.0 * t, 1.0);
    ep = std::max(ep, std::abs(bottcher_param(lam, 2.0 * g, t2) - fz));
    er = std::max(er, std::abs(green(lam, z) - g));
    ++n;
  }
  const double worst = std::max({eg, eb, ep, er});
  return {worst <= 1e-9, std::to_string(n) + " samples; G(f)-2G " + num(eg) + ", w(f)-w^2 " + num(eb) +
                             ", psi(2w)-f(psi) " + num(ep) + ", G(psi)-Re w " + num(er)};
}

Outcome fatou_suite() {
  RunReport r = run("fatou-selftest", {{"samples", 100}}, "fatou");
  return require_checks(r, {"phi_attr_abel", "rho1_cv", "rho1_cp", "chi1_equivariance"});
}

Outcome lavaurs_suite() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> pts;
  while (pts.size() < 100) {
    cplx z(-0.5 + 0.4 * u(rng), 0.4 * u(rng));
    if (basin_test(z).status == BasinStatus::in_basin) pts.push_back(z);
  }
  const cplx one(1.0);
  double e1 = 0.0, e2 = 0.0;
  for (cplx delta : {cplx(0.0), cplx(0.0, 0.3), cplx(0.5)}) {
    for (cplx z : pts) {
      const cplx lz = lavaurs_eval(delta, z);
      const cplx lfz = lavaurs_eval(delta, eval_f(one, z));
      e1 = std::max(e1, std::abs(lfz - lavaurs_eval(delta + 1.0, z)));
      e2 = std::max(e2, std::abs(eval_f(one, lz) - lfz) / (1.0 + std::norm(lz)));
    }
  }
  const cplx cv = crit_value(one);
  const double moved = std::abs(lavaurs_eval(0.0, cv) - cv);
  return {e1 <= 1e-6 && e2 <= 1e-6 && moved > 1e-2,
          "L(f)-L_{d+1} " + num(e1) + ", f(L)-L(f) " + num(e2) + ", |L_0(cv)-cv| " + num(moved) + " (need > 1e-2)"};
}

Outcome horn_suite() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(-1.0, 1.0), im(3.0, 6.0);
  double eq = 0.0;
  for (int i = 0; i < 50; ++i) {
    const cplx w(re(rng), im(rng));
    eq = std::max(eq, std::abs(horn(w + 1.0).value - horn(w).value - 1.0));
  }
  const RenormDerivs d = renorm_derivs();
  const double agree = std::abs(d.d2 - d.d2_check) / std::abs(d.d2);
  double mult = 0.0;
  const cplx aqs[] = {std::polar(0.05, kPi / 8.0), std::polar(0.05, 0.6), std::polar(0.08, 0.3)};
  for (int q : {5, 8}) {
    for (cplx aq : aqs) {
      const cplx lam = std::exp(cplx(0.0, kTwoPi) / (static_cast<double>(q) - aq));
      if (!alpha_q_sector(lam, q).in_sector) return {false, "parameter outside the sector"};
      const cplx expected = std::exp(cplx(0.0, -kTwoPi) / alpha(lam));
      mult = std::max(mult, std::abs(renorm_pert_multiplier(lam, 1e-8, 16, 0.25) - expected));
    }
  }
  const bool ok = eq <= 1e-6 && std::abs(d.d1 - 1.0) <= 1e-3 && std::abs(d.d2) > 0.1 && agree <= 0.01 && mult <= 1e-3;
  return {ok, "equivariance " + num(eq) + ", |R'(0)-1| " + num(std::abs(d.d1 - 1.0)) + ", |R''(0)| " +
                  num(std::abs(d.d2)) + " radius agreement " + num(agree) + ", multiplier " + num(mult)};
}

Outcome yoccoz() {
  RunReport r = run("yoccoz-sweep", {{"q_min", 2}, {"q_max", 12}}, "yoccoz");
  return require_checks(r, {"classical_inequality", "scaled_band", "band_ratio", "spot_D2", "spot_D3"});
}

Outcome wake() {
  RunReport r = run("wake-bound", {{"q_values", {5, 8}}}, "wake", 128);
  Outcome o = require_checks(r, {"wake_bound"});
  const auto defect = csv_column(out_root() / "wake" / "wake-bound.csv", 5);
  const auto rhs = csv_column(out_root() / "wake" / "wake-bound.csv", 6);
  for (std::size_t i = 0; i < defect.size(); ++i) o.detail += "; slack " + num(rhs[i] - defect[i]);
  o.pass = o.pass && defect.size() == 2;
  return o;
}

Outcome lavaurs_converge() {
  RunReport r = run("lavaurs-converge", {{"delta_re", 0.0}, {"delta_im", 0.3}, {"k_values", {10, 20, 40}}}, "lavaurs");
  Outcome o = require_checks(r, {"strictly_decreasing", "final_below_tol"});
  o.detail += "; sup errors " + joined(csv_column(out_root() / "lavaurs" / "lavaurs-converge.csv", 1));
  return o;
}

Outcome ray_converge() {
  RunReport r = run("ray-converge", {{"delta_re", 0.0}, {"delta_im", 0.3}, {"k_values", {10, 20, 40}}}, "ray");
  Outcome o = require_checks(r, {"strictly_decreasing", "final_below_tol"});
  o.detail += "; one-sided " + joined(csv_column(out_root() / "ray" / "ray-converge.csv", 1));
  return o;
}

Outcome census() {
  RunReport r1 = run("render-escape", {{"delta_re", 0.0}, {"delta_im", 0.0}, {"d", 1}, {"resolution", 1024}}, "census1");
  Outcome o1 = require_checks(r1, {"all_zero_croissant", "dyadic_base_points", "invariant_base_at_zero"});
  RunReport r2 = run("render-escape", {{"delta_re", 0.0}, {"delta_im", 0.0}, {"d", 2}, {"resolution", 1024}}, "census2");
  Outcome o2 = require_checks(r2, {"all_zero_croissant"});
  return {o1.pass && o2.pass, "d=1: " + o1.detail + " | d=2: " + o2.detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all = {
      {"functional-equation suite", 60.0, functional_equations},
      {"Fatou suite", 600.0, fatou_suite},
      {"Lavaurs suite", 600.0, lavaurs_suite},
      {"horn/renormalization suite", 600.0, horn_suite},
      {"Yoccoz reproduction", 120.0, yoccoz},
      {"wake-bound check", 300.0, wake},
      {"Lavaurs convergence", 300.0, lavaurs_converge},
      {"ray convergence", 600.0, ray_converge},
      {"structure-theorem census", 600.0, census},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > all[i].budget_s) {
      o.pass = false;
      o.detail += "; over the runtime budget";
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, all.size());
  return failed == 0 ? 0 : 1;
}

#include "pimplode/expcli.hpp"

#include "pimplode/mset.hpp"
#include "pimplode/renorm.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace pimplode {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kNames[] = {"yoccoz-sweep",     "sharpness",    "wake-bound",    "lavaurs-converge",
                                  "ray-converge",     "render-escape", "fatou-selftest"};

[[noreturn]] void config_error(const std::string& msg) { throw Error(Err::ConfigInvalid, msg); }

struct ParamSpec {
  std::vector<std::string> required;
  json defaults;
};

ParamSpec param_spec(Experiment e) {
  switch (e) {
    case Experiment::yoccoz_sweep:
      return {{"q_min", "q_max"}, {{"band_lo", 0.3}, {"band_hi", 3.0}, {"band_ratio", 5.0}, {"spot_tol", 0.02}}};
    case Experiment::sharpness:
      return {{"q_min", "q_max"}, {{"lower_bound", 0.3}}};
    case Experiment::wake_bound:
      return {{"q_values"}, {{"g_exponent", -2.0}}};
    case Experiment::lavaurs_converge:
      return {{"delta_re", "delta_im", "k_values"},
              {{"grid", 5}, {"v_re_min", 1.0}, {"v_re_max", 2.0}, {"v_im_min", -0.5}, {"v_im_max", 0.5}, {"tol", 1e-2}}};
    case Experiment::ray_converge:
      return {{"delta_re", "delta_im", "k_values"}, {{"a", 1.0}, {"b", 1.0}, {"samples", 32}, {"tol", 5e-2}}};
    case Experiment::render_escape:
      return {{"delta_re", "delta_im", "d", "resolution"},
              {{"g", 0.0},
               {"re_min", -1.6},
               {"re_max", 0.4},
               {"im_min", -0.8},
               {"im_max", 0.8},
               {"min_pixels", 4},
               {"match_pixels", 2.0},
               {"max_dyadic_depth", 10},
               {"min_dyadic", 8}}};
    case Experiment::fatou_selftest:
    default:
      return {{}, {{"samples", 100}, {"tol", 1e-8}}};
  }
}

bool is_int_list(const json& v) {
  if (!v.is_array() || v.empty()) return false;
  return std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
}

void check_param_type(const std::string& key, const json& given, const json& proto) {
  if (key == "q_values" || key == "k_values") {
    if (!is_int_list(given)) config_error("params." + key + ": expected a nonempty list of integers");
    return;
  }
  if (proto.is_number_integer() || key == "q_min" || key == "q_max" || key == "d" || key == "resolution") {
    if (!given.is_number_integer()) config_error("params." + key + ": expected an integer");
    return;
  }
  if (!given.is_number()) config_error("params." + key + ": expected a number");
}

std::size_t worker_count(int threads, std::size_t items) {
  std::size_t n = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, items));
}

// Runs fn(i) for i < n on a pool; results are stored by index by the caller.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// A row either carries its formatted fields or the error that stopped it.
struct Row {
  std::vector<std::string> fields;
  std::string error;
  bool ok() const { return error.empty(); }
};

template <class Fn>
Row guarded(Fn&& fn) {
  Row r;
  try {
    r.fields = fn();
  } catch (const Error& e) {
    r.error = std::string(err_name(e.kind())) + ": " + e.what();
  }
  return r;
}

fs::path write_csv(const fs::path& dir, const std::string& file, const std::string& header,
                   const std::vector<Row>& rows, RunReport& rep) {
  const fs::path path = dir / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Err::IoError, "cannot open " + path.string());
  os << header << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok()) {
      rep.row_errors.push_back({file, i, rows[i].error});
      continue;
    }
    for (std::size_t j = 0; j < rows[i].fields.size(); ++j) os << (j ? "," : "") << rows[i].fields[j];
    os << '\n';
  }
  if (!os) throw Error(Err::IoError, "write failed for " + path.string());
  rep.artifacts.push_back(path);
  return path;
}

void add_check(RunReport& rep, std::string name, bool passed, std::string detail) {
  rep.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::string b(bool v) { return v ? "true" : "false"; }

cplx param_delta(const json& p) { return {p.at("delta_re").get<double>(), p.at("delta_im").get<double>()}; }

// Limb-center rows shared by yoccoz-sweep and sharpness.
std::vector<DefectRecord> limb_rows(const ExperimentConfig& cfg, std::vector<Row>& rows) {
  const int q0 = cfg.params.at("q_min").get<int>();
  const int q1 = cfg.params.at("q_max").get<int>();
  const std::size_t n = static_cast<std::size_t>(q1 - q0 + 1);
  std::vector<DefectRecord> recs(n);
  rows.assign(n, {});
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const int q = q0 + static_cast<int>(i);
    rows[i] = guarded([&] {
      recs[i] = yoccoz_defect(limb_center(q), 1, q);
      const auto& r = recs[i];
      return std::vector<std::string>{std::to_string(q), fmt_num(r.lambda.real()), fmt_num(r.lambda.imag()),
                                      fmt_num(r.defect), fmt_num(r.scaled), b(r.yoccoz_ok)};
    });
  });
  return recs;
}

constexpr const char* kDefectHeader = "q,lambda_re,lambda_im,defect,scaled_defect,classical_ok";

void run_yoccoz(const ExperimentConfig& cfg, RunReport& rep) {
  std::vector<Row> rows;
  auto recs = limb_rows(cfg, rows);
  write_csv(cfg.out_dir, "yoccoz-sweep.csv", kDefectHeader, rows, rep);
  const auto& p = cfg.params;
  bool classical = true;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!rows[i].ok()) continue;
    classical = classical && recs[i].yoccoz_ok;
    lo = std::min(lo, recs[i].scaled);
    hi = std::max(hi, recs[i].scaled);
  }
  const bool complete = rep.row_errors.empty() && !recs.empty();
  add_check(rep, "classical_inequality", complete && classical, "all rows satisfy the log-form inequality");
  add_check(rep, "scaled_band", complete && lo >= p.at("band_lo").get<double>() && hi <= p.at("band_hi").get<double>(),
            "scaled defects in [" + fmt_num(lo) + ", " + fmt_num(hi) + "]");
  add_check(rep, "band_ratio", complete && hi / lo <= p.at("band_ratio").get<double>(), "max/min = " + fmt_num(hi / lo));
  const double tol = p.at("spot_tol").get<double>();
  for (auto [q, ref] : {std::pair{2, 0.848}, std::pair{3, 0.92}}) {
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].q != q || !rows[i].ok()) continue;
      add_check(rep, "spot_D" + std::to_string(q), std::abs(recs[i].scaled - ref) <= tol * ref,
                "D = " + fmt_num(recs[i].scaled) + ", reference " + fmt_num(ref));
    }
  }
}

void run_sharpness(const ExperimentConfig& cfg, RunReport& rep) {
  std::vector<Row> rows;
  auto recs = limb_rows(cfg, rows);
  write_csv(cfg.out_dir, "sharpness.csv", kDefectHeader, rows, rep);
  const double bound = cfg.params.at("lower_bound").get<double>();
  double lo = std::numeric_limits<double>::infinity();
  std::vector<double> scaled;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!rows[i].ok()) continue;
    lo = std::min(lo, recs[i].scaled);
    scaled.push_back(recs[i].scaled);
  }
  add_check(rep, "lower_bound", rep.row_errors.empty() && lo >= bound, "min scaled defect " + fmt_num(lo));
  bool shrinking = scaled.size() >= 3;
  for (std::size_t i = 2; i < scaled.size(); ++i)
    shrinking = shrinking && std::abs(scaled[i] - scaled[i - 1]) < std::abs(scaled[i - 1] - scaled[i - 2]);
  add_check(rep, "increments_shrink", shrinking, "successive scaled defects settle");
}

void run_wake_bound(const ExperimentConfig& cfg, RunReport& rep) {
  const auto qs = cfg.params.at("q_values").get<std::vector<int>>();
  const double gexp = cfg.params.at("g_exponent").get<double>();
  std::vector<Row> rows(qs.size());
  std::vector<char> ok(qs.size(), 0);
  parallel_for(qs.size(), cfg.threads, [&](std::size_t i) {
    const int q = qs[i];
    rows[i] = guarded([&] {
      if (q < 2) throw Error(Err::OutsideDomain, "wake-bound: q must be at least 2");
      const double g = std::exp2(gexp * q);
      const WakeSpec w = wake_spec(1, q);
      const double theta = w.midpoint();
      const Tier tier = tier_for_bits(escalate_bits(cfg.precision_bits, g));
      return with_tier(tier, [&](auto tag) {
        using C = decltype(tag);
        using R = real_t<C>;
        const C lam = psi_M<C>(R(g), R(theta));
        const double defect = yoccoz_defect(to_cplx(lam), 1, q).defect;
        const double rhs = wake_bound_rhs(q, g);
        ok[i] = defect < rhs && wake_membership(to_cplx(lam), w);
        return std::vector<std::string>{std::to_string(q),      fmt_num(g),      fmt_num(theta),
                                        fmt_num(R(lam.real())), fmt_num(R(lam.imag())), fmt_num(defect),
                                        fmt_num(rhs),           b(ok[i] != 0)};
      });
    });
  });
  write_csv(cfg.out_dir, "wake-bound.csv", "q,g,theta,lambda_re,lambda_im,defect,rhs,ok", rows, rep);
  const bool all = rep.row_errors.empty() && std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  add_check(rep, "wake_bound", all, "defect below the wake bound with positive slack on every row");
}

// Sequence checks shared by the two convergence experiments.
void convergence_checks(RunReport& rep, const std::vector<double>& errs, bool complete, double tol) {
  bool dec = complete && errs.size() >= 2;
  for (std::size_t i = 1; i < errs.size(); ++i) dec = dec && errs[i] < errs[i - 1];
  add_check(rep, "strictly_decreasing", dec, "errors decrease in k");
  const double last = errs.empty() ? std::numeric_limits<double>::infinity() : errs.back();
  add_check(rep, "final_below_tol", complete && last < tol, "final " + fmt_num(last) + " vs " + fmt_num(tol));
}

void run_lavaurs_converge(const ExperimentConfig& cfg, RunReport& rep) {
  const auto& p = cfg.params;
  const cplx delta = param_delta(p);
  const auto ks = p.at("k_values").get<std::vector<int>>();
  PetalGrid grid{p.at("v_re_min").get<double>(), p.at("v_re_max").get<double>(), p.at("v_im_min").get<double>(),
                 p.at("v_im_max").get<double>(), p.at("grid").get<int>()};
  std::vector<Row> rows(ks.size());
  std::vector<double> errs(ks.size(), 0.0);
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    rows[i] = guarded([&] {
      errs[i] = lavaurs_sup_error(delta, ks[i], grid);
      return std::vector<std::string>{std::to_string(ks[i]), fmt_num(errs[i])};
    });
  });
  write_csv(cfg.out_dir, "lavaurs-converge.csv", "k,sup_err", rows, rep);
  convergence_checks(rep, errs, rep.row_errors.empty(), p.at("tol").get<double>());
}

void run_ray_converge(const ExperimentConfig& cfg, RunReport& rep) {
  const auto& p = cfg.params;
  const cplx delta = param_delta(p);
  const auto ks = p.at("k_values").get<std::vector<int>>();
  std::vector<Row> rows(ks.size());
  std::vector<double> errs(ks.size(), 0.0);
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    rows[i] = guarded([&] {
      auto r = ray_distance(delta, ks[i], p.at("a").get<double>(), p.at("b").get<double>(),
                            p.at("samples").get<int>(), cfg.precision_bits);
      errs[i] = r.one_sided;
      return std::vector<std::string>{std::to_string(ks[i]), fmt_num(r.one_sided), fmt_num(r.full)};
    });
  });
  write_csv(cfg.out_dir, "ray-converge.csv", "k,hausdorff_one_sided,hausdorff_full", rows, rep);
  convergence_checks(rep, errs, rep.row_errors.empty(), p.at("tol").get<double>());
}

void run_render_escape(const ExperimentConfig& cfg, RunReport& rep) {
  const auto& p = cfg.params;
  const cplx delta = param_delta(p);
  const int d = p.at("d").get<int>();
  const double g = p.at("g").get<double>();
  Window win{p.at("re_min").get<double>(), p.at("re_max").get<double>(), p.at("im_min").get<double>(),
             p.at("im_max").get<double>()};
  CensusOptions opt;
  opt.max_dyadic_depth = p.at("max_dyadic_depth").get<int>();
  opt.match_pixels = p.at("match_pixels").get<double>();
  opt.min_pixels = p.at("min_pixels").get<int>();
  opt.threads = cfg.threads;
  const Census c = escape_census(delta, d, g, win, p.at("resolution").get<int>(), opt);

  const std::string stem = "escape-d" + std::to_string(d);
  rep.artifacts.push_back(render_image(mask_image(c.mask), cfg.out_dir / (stem + ".png")));
  const fs::path jpath = cfg.out_dir / (stem + "-census.json");
  std::ofstream os(jpath, std::ios::binary);
  if (!os) throw Error(Err::IoError, "cannot open " + jpath.string());
  os << census_json(c, delta, d, g).dump(2) << '\n';
  if (!os) throw Error(Err::IoError, "write failed for " + jpath.string());
  rep.artifacts.push_back(jpath);

  long zero = 0, dyadic = 0;
  bool at_zero = false;
  const double tol = opt.match_pixels * c.mask.pixel_size();
  for (std::size_t i = 0; i < c.components.size(); ++i) {
    const auto& r = c.components[i];
    if (r.croissant_class == CroissantClass::zero_croissant) ++zero;
    if (!r.note.empty()) rep.row_errors.push_back({stem + "-census.json", i, r.note});
    if (r.base_dyadic) ++dyadic;
    if (r.base_point && std::abs(*r.base_point) <= tol) at_zero = true;
  }
  const long n = static_cast<long>(c.components.size());
  add_check(rep, "all_zero_croissant", n > 0 && zero == n,
            std::to_string(zero) + " of " + std::to_string(n) + " components zero-croissant");
  if (d == 1 && delta == cplx(0.0)) {
    const long want = p.at("min_dyadic").get<long>();
    add_check(rep, "dyadic_base_points", dyadic >= want,
              std::to_string(dyadic) + " base points matched to dyadic points");
    add_check(rep, "invariant_base_at_zero", at_zero, "a base point within tolerance of 0");
  }
}

struct SelfCheck {
  std::string name;
  double value;
  double tolerance;
};

void run_fatou_selftest(const ExperimentConfig& cfg, RunReport& rep) {
  const int n = cfg.params.at("samples").get<int>();
  const double tol = cfg.params.at("tol").get<double>();
  const cplx cv(-0.25, 0.0), cp(-0.5, 0.0);
  auto f1 = [](cplx z) { return z + z * z; };
  const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
  std::vector<std::function<double()>> jobs = {
      [&] {
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
          const cplx v(1.0 + 2.0 * (i % side) / side, -1.0 + 2.0 * (i / side) / side);
          const cplx z = phi_attr_inv(v);
          e = std::max(e, std::abs(phi_attr(f1(z)) - phi_attr(z) - 1.0));
        }
        return e;
      },
      [&] { return std::abs(phi_attr(cv) - 1.0); },
      [&] { return std::abs(rho1(cv) - 1.0); },
      [&] { return std::abs(rho1(cp)); },
      [&] {
        double e = 0.0;
        for (int i = 0; i < 50; ++i) {
          const cplx w(-2.0 + 4.0 * (i % 10) / 10.0, 3.0 + 3.0 * (i / 10) / 5.0);
          e = std::max(e, std::abs(chi1(w + 1.0) - f1(chi1(w))));
        }
        return e;
      },
      [&] {
        double e = 0.0;
        for (int i = 0; i < 20; ++i) {
          const cplx w(-1.0 + 0.1 * i, 3.0 + 0.15 * i);
          e = std::max(e, std::abs(horn(w + 1.0).value - horn(w).value - 1.0));
        }
        return e;
      },
      [&] { return validate_eta0() ? 0.0 : 1.0; },
  };
  const std::vector<std::string> names = {"phi_attr_abel", "phi_attr_cv", "rho1_cv",     "rho1_cp",
                                          "chi1_equivariance", "horn_equivariance", "eta0_valid"};
  const std::vector<double> tols = {tol, tol, tol, tol, tol, 1e-6, 0.5};
  std::vector<Row> rows(jobs.size());
  std::vector<double> vals(jobs.size(), std::numeric_limits<double>::infinity());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    rows[i] = guarded([&] {
      vals[i] = jobs[i]();
      return std::vector<std::string>{names[i], fmt_num(vals[i]), fmt_num(tols[i]), b(vals[i] <= tols[i])};
    });
  });
  write_csv(cfg.out_dir, "fatou-selftest.csv", "check,value,tolerance,ok", rows, rep);
  for (std::size_t i = 0; i < jobs.size(); ++i)
    add_check(rep, names[i], rows[i].ok() && vals[i] <= tols[i], "value " + fmt_num(vals[i]));
}

void write_report(const ExperimentConfig& cfg, RunReport& rep) {
  json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["precision_bits"] = cfg.precision_bits;
  j["params"] = cfg.params;
  json arts = json::array();
  for (const auto& a : rep.artifacts) arts.push_back(a.filename().string());
  j["artifacts"] = arts;
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  json errs = json::array();
  for (const auto& e : rep.row_errors) errs.push_back({{"artifact", e.artifact}, {"row", e.row}, {"error", e.error}});
  j["row_errors"] = errs;
  j["passed"] = rep.all_passed();
  const fs::path path = cfg.out_dir / "report.json";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Err::IoError, "cannot open " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw Error(Err::IoError, "write failed for " + path.string());
  rep.artifacts.push_back(path);
}

double seg_dist(cplx p, cplx a, cplx q) {
  const cplx d = q - a;
  const double n = std::norm(d);
  const double t = n > 0.0 ? std::clamp(std::real((p - a) * std::conj(d)) / n, 0.0, 1.0) : 0.0;
  return std::abs(p - (a + t * d));
}

double poly_dist(cplx p, const std::vector<cplx>& poly) {
  if (poly.size() == 1) return std::abs(p - poly[0]);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) m = std::min(m, seg_dist(p, poly[i], poly[i + 1]));
  return m;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

const char* experiment_name(Experiment e) { return kNames[static_cast<int>(e)]; }

std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (int i = 0; i < 7; ++i)
    if (name == kNames[i]) return static_cast<Experiment>(i);
  return std::nullopt;
}

std::vector<std::string> required_params(Experiment e) { return param_spec(e).required; }

bool RunReport::all_passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("config: expected a JSON object");
  static const std::set<std::string> top = {"experiment", "params", "out_dir", "precision", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!top.count(it.key())) config_error("config: unknown key '" + it.key() + "'");
  if (!j.contains("experiment") || !j["experiment"].is_string()) config_error("config: 'experiment' is required");
  const auto e = experiment_from_name(j["experiment"].get<std::string>());
  if (!e) config_error("config: unknown experiment '" + j["experiment"].get<std::string>() + "'");

  ExperimentConfig cfg;
  cfg.experiment = *e;
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) config_error("config: 'out_dir' must be a string");
    cfg.out_dir = j["out_dir"].get<std::string>();
  }
  if (j.contains("precision")) {
    if (!j["precision"].is_number_integer()) config_error("config: 'precision' must be an integer");
    cfg.precision_bits = j["precision"].get<int>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<int>() < 0)
      config_error("config: 'threads' must be a nonnegative integer");
    cfg.threads = j["threads"].get<int>();
  }
  if (cfg.precision_bits < 1) config_error("config: 'precision' must be positive");
  tier_for_bits(cfg.precision_bits);

  const json given = j.value("params", json::object());
  if (!given.is_object()) config_error("config: 'params' must be an object");
  const ParamSpec spec = param_spec(*e);
  json params = spec.defaults;
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string& k = it.key();
    const bool req = std::find(spec.required.begin(), spec.required.end(), k) != spec.required.end();
    if (!req && !spec.defaults.contains(k)) config_error("params: unknown key '" + k + "' for " + kNames[int(*e)]);
    check_param_type(k, it.value(), req ? json() : spec.defaults[k]);
    params[k] = it.value();
  }
  for (const auto& k : spec.required)
    if (!params.contains(k)) config_error("params: missing required key '" + k + "' for " + kNames[int(*e)]);

  if (params.contains("q_min") && (params["q_min"].get<int>() < 2 || params["q_max"].get<int>() < params["q_min"].get<int>()))
    config_error("params: need 2 <= q_min <= q_max");
  if (params.contains("grid") && params["grid"].get<int>() < 1) config_error("params: grid must be positive");
  if (params.contains("resolution") && params["resolution"].get<int>() < 8) config_error("params: resolution too small");
  if (params.contains("d") && params["d"].get<int>() < 1) config_error("params: d must be positive");
  if (params.contains("samples") && params["samples"].get<int>() < 2) config_error("params: samples must be >= 2");
  if (params.contains("k_values"))
    for (int k : params["k_values"].get<std::vector<int>>())
      if (k < 2) config_error("params: k values must be >= 2");
  cfg.params = std::move(params);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Err::IoError, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    config_error(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(Err::IoError, "cannot create " + cfg.out_dir.string());
  RunReport rep;
  switch (cfg.experiment) {
    case Experiment::yoccoz_sweep: run_yoccoz(cfg, rep); break;
    case Experiment::sharpness: run_sharpness(cfg, rep); break;
    case Experiment::wake_bound: run_wake_bound(cfg, rep); break;
    case Experiment::lavaurs_converge: run_lavaurs_converge(cfg, rep); break;
    case Experiment::ray_converge: run_ray_converge(cfg, rep); break;
    case Experiment::render_escape: run_render_escape(cfg, rep); break;
    case Experiment::fatou_selftest: run_fatou_selftest(cfg, rep); break;
  }
  write_report(cfg, rep);
  return rep;
}

GrayImage mask_image(const EscapeMask& mask) {
  GrayImage img{mask.width, mask.height, {}};
  img.pixels.resize(mask.cls.size());
  std::transform(mask.cls.begin(), mask.cls.end(), img.pixels.begin(),
                 [](PixelClass c) { return static_cast<std::uint8_t>(c); });
  return img;
}

fs::path render_image(const GrayImage& img, const fs::path& path) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
    throw Error(Err::OutsideDomain, "render_image: empty or inconsistent grid");
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    std::string msg = pi.message;
    png_image_free(&pi);
    throw Error(Err::IoError, "render_image: " + msg);
  }
  return path;
}

GrayImage read_png(const fs::path& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str())) throw Error(Err::IoError, "read_png: " + std::string(pi.message));
  pi.format = PNG_FORMAT_GRAY;
  GrayImage img{static_cast<int>(pi.width), static_cast<int>(pi.height), {}};
  img.pixels.resize(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = pi.message;
    png_image_free(&pi);
    throw Error(Err::IoError, "read_png: " + msg);
  }
  return img;
}

json census_json(const Census& c, cplx delta, int d, double g) {
  json j;
  j["delta"] = cplx_json(delta);
  j["d"] = d;
  j["g"] = g;
  j["window"] = {c.mask.window.re_min, c.mask.window.re_max, c.mask.window.im_min, c.mask.window.im_max};
  j["width"] = c.mask.width;
  j["height"] = c.mask.height;
  j["pixel_size"] = c.mask.pixel_size();
  j["too_small"] = c.too_small;
  json comps = json::array();
  for (const auto& r : c.components) {
    json o;
    o["level_d"] = r.level_d;
    o["label"] = r.label ? json(r.label->str()) : json(nullptr);
    o["base_point"] = r.base_point ? cplx_json(*r.base_point) : json(nullptr);
    o["secondary_pinch"] = r.secondary_pinch ? cplx_json(*r.secondary_pinch) : json(nullptr);
    o["croissant_class"] = to_string(r.croissant_class);
    o["base_dyadic"] = r.base_dyadic ? json(r.base_dyadic->str()) : json(nullptr);
    o["pixel_area"] = r.pixel_area;
    o["clipped"] = r.clipped;
    o["note"] = r.note;
    comps.push_back(std::move(o));
  }
  j["components"] = comps;
  return j;
}

double lavaurs_sup_error(cplx delta, int k, const PetalGrid& grid) {
  if (grid.n < 1 || k < 1) throw Error(Err::OutsideDomain, "lavaurs_sup_error: need k >= 1 and a nonempty grid");
  const cplx lam = std::exp(cplx(0.0, kTwoPi) / (static_cast<double>(k) - delta));
  const auto at = [&](double lo, double hi, int i) { return grid.n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (grid.n - 1); };
  double e = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    for (int i = 0; i < grid.n; ++i) {
      const cplx z = phi_attr_inv(cplx(at(grid.re_min, grid.re_max, i), at(grid.im_min, grid.im_max, j)));
      cplx x = z;
      for (int n = 0; n < k; ++n) x = eval_f(lam, x);
      e = std::max(e, std::abs(x - lavaurs_eval(delta, z)));
    }
  }
  return e;
}

RayDistance ray_distance(cplx delta, int k, double a, double b, int samples, int precision_bits) {
  if (!(a > 0.0) || !(b > 0.0) || k < 1 || samples < 2)
    throw Error(Err::OutsideDomain, "ray_distance: need a, b > 0, k >= 1, samples >= 2");
  const auto seg = enriched_ray(delta, EnrichedAngle::parse("(0)"), 0.0, {1, a}, {0, b}, samples);
  std::vector<cplx> limit;
  for (const auto& piece : seg.pieces) limit.insert(limit.end(), piece.begin(), piece.end());

  const double lo = std::ldexp(a, -k);
  RayDistance out;
  out.bits = std::max(precision_bits, escalate_bits(precision_bits, lo));
  std::vector<cplx> traced = with_tier(tier_for_bits(out.bits), [&](auto tag) {
    using C = decltype(tag);
    using R = real_t<C>;
    const C dl = from_cplx<C>(delta);
    const C lam = exp(C(R(0), pi_of<C>() * R(2)) / (C(R(k)) - dl));
    auto ray = trace_ray<C>(lam, R(0), R(b), R(lo), std::max(2, samples * k / 4));
    std::vector<cplx> pts;
    for (const auto& s : ray.samples) pts.push_back(to_cplx(s.point));
    return pts;
  });
  for (cplx p : traced) out.one_sided = std::max(out.one_sided, poly_dist(p, limit));
  double back = 0.0;
  for (cplx p : limit) back = std::max(back, poly_dist(p, traced));
  out.full = std::max(out.one_sided, back);
  return out;
}

}  // namespace pimplode

#pragma once

#include "pimplode/lavaurs.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimplode {

enum class Experiment {
  yoccoz_sweep,
  sharpness,
  wake_bound,
  lavaurs_converge,
  ray_converge,
  render_escape,
  fatou_selftest,
};

const char* experiment_name(Experiment e);
std::optional<Experiment> experiment_from_name(std::string_view name);

struct ExperimentConfig {
  Experiment experiment = Experiment::fatou_selftest;
  // Validated, with defaults filled in.
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path out_dir = ".";
  int precision_bits = 53;
  int threads = 0;
};

// Rejects unknown keys and missing required parameters with ConfigInvalid.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
// Required parameter names of an experiment.
std::vector<std::string> required_params(Experiment e);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RowError {
  std::string artifact;
  std::size_t row = 0;
  std::string error;
};

struct RunReport {
  std::vector<std::filesystem::path> artifacts;
  std::vector<CheckResult> checks;
  std::vector<RowError> row_errors;
  bool all_passed() const;
};

RunReport run_experiment(const ExperimentConfig& cfg);

// 8-bit grayscale raster, row-major from the top row.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

GrayImage mask_image(const EscapeMask& mask);
std::filesystem::path render_image(const GrayImage& img, const std::filesystem::path& path);
GrayImage read_png(const std::filesystem::path& path);

nlohmann::json census_json(const Census& census, cplx delta, int d, double g);

// Sup of |f_lambda^k - L_delta| on a grid given in attracting Fatou coordinates,
// lambda = exp(2 pi i / (k - delta)).
struct PetalGrid {
  double re_min = 1.0, re_max = 2.0, im_min = -0.5, im_max = 0.5;
  int n = 5;
};
double lavaurs_sup_error(cplx delta, int k, const PetalGrid& grid);

// Hausdorff distances between R_lambda(0) on [a / 2^k, b] and the broken
// enriched ray Psi_{delta,(0)}([a, inf]) u psi_1([0, b]).
struct RayDistance {
  double one_sided = 0.0;
  double full = 0.0;
  int bits = 53;
};
RayDistance ray_distance(cplx delta, int k, double a, double b, int samples, int precision_bits);

}  // namespace pimplode

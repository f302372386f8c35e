#include "pimplode/expcli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace pimplode;
  CLI::App app{"Experiment runner for imploded quadratic dynamics"};
  std::string experiment, config_path, out_dir;
  int precision = 0;
  int threads = -1;
  std::vector<std::string> names;
  for (int i = 0; i < 7; ++i) names.emplace_back(experiment_name(static_cast<Experiment>(i)));
  app.add_option("experiment", experiment, "Experiment name")->required()->check(CLI::IsMember(names));
  app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--precision", precision, "Mantissa bits: 53, 128 or 256")->check(CLI::Range(1, 256));
  app.add_option("--threads", threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (experiment_name(cfg.experiment) != experiment) {
      std::cerr << "error: config describes '" << experiment_name(cfg.experiment) << "', not '" << experiment << "'\n";
      return 2;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (precision > 0) cfg.precision_bits = precision;
    if (threads >= 0) cfg.threads = threads;
    RunReport rep = run_experiment(cfg);
    for (const auto& c : rep.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    for (const auto& e : rep.row_errors) std::cout << "ROW-ERROR " << e.artifact << '#' << e.row << ": " << e.error << '\n';
    for (const auto& a : rep.artifacts) std::cout << "wrote " << a.string() << '\n';
    return rep.all_passed() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << err_name(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == Err::ConfigInvalid ? 2 : 3;
  }
}

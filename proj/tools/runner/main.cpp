#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "runs.hpp"
#include "validate.hpp"

namespace {

using namespace hagedorn;
using namespace hagedorn::runner;

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kRunError = 3 };

int run_mode(const std::string& mode, const std::filesystem::path& config_path, const RunOptions& opt,
             std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (mode == "scatter" && !cfg.scatter.present)
    throw ConfigError("scatter", 0, "scatter mode needs a [scatter] section");
  if (mode == "ehrenfest" && !cfg.ehrenfest.present)
    throw ConfigError("ehrenfest", 0, "ehrenfest mode needs an [ehrenfest] section");

  CsvTable table = mode == "propagate"   ? run_propagate(cfg, opt, std::cerr)
                   : mode == "scatter"   ? run_scatter(cfg, opt, std::cerr)
                   : mode == "ehrenfest" ? run_ehrenfest(cfg, opt, std::cerr)
                                         : run_localize(cfg, opt, std::cerr);
  const auto path = opt.out / (mode + ".csv");
  table.write(path);
  std::cerr << "wrote " << path.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hagedorn wavepacket propagation with a split-operator reference"};
  app.require_subcommand(1);

  std::filesystem::path config_path;
  RunOptions opt;
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
  std::uint64_t validate_seed = 7;

  for (const char* name : {"propagate", "scatter", "ehrenfest", "localize"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " mode from a TOML config");
    sub->add_option("--config", config_path, "TOML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--jobs", opt.jobs, "parallel hbar runs")->check(CLI::Range(1, 64))->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--timing", opt.timing, "record wall-clock times (output is then not reproducible)");
  }
  CLI::App* validate = app.add_subcommand("validate", "check the library invariants and print a pass/fail matrix");
  validate->add_option("--tolerance-scale", tolerance_scale, "multiply every scalable tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  validate->add_option("--seed", validate_seed, "random frames and vectors")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string mode = chosen->get_name();
  try {
    if (mode == "validate") {
      ValidateOptions vo;
      vo.tolerance_scale = tolerance_scale;
      vo.seed = validate_seed;
      const auto report = run_validate(vo);
      report.print(std::cout);
      return report.passed() ? kOk : kValidationFailed;
    }
    return run_mode(mode, config_path, opt, seed);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << mode << " failed: " << e.what() << '\n';
    return kRunError;
  } catch (const std::exception& e) {
    std::cerr << mode << " failed: " << e.what() << '\n';
    return kRunError;
  }
}

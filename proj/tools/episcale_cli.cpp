// Command-line front end for the experiment harness.
//
//   episcale <command> --config PATH --out DIR [--seed U64] [--workers K] [--force]
//   episcale rerun --manifest PATH --out DIR [--workers K] [--force]
//
// Exit codes: 0 success, 1 rerun mismatch or other failure, 2 config or
// output-directory error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "episcale/harness/experiments.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommandArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool force = false;
};

void print_series(const episcale::ExperimentReport& report) {
  for (const auto& s : report.series) {
    if (!s.fit) continue;
    std::cout << s.metric << " t=" << s.t << " slope=" << s.fit->slope;
    if (std::isfinite(s.reference_slope)) std::cout << " reference=" << s.reference_slope;
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial SIR particle simulations, limit solvers and convergence diagnostics"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Simulate replicas and write event logs and compartment counts"},
      {"solve-nonlocal", "Solve the non-local field system on a grid"},
      {"solve-local", "Solve the local field system on a grid"},
      {"converge-meanfield", "Distance of mean-field particle runs to the non-local solution"},
      {"converge-local", "Mollification, field and commutator convergence in the local regime"},
      {"diagnostics", "Martingale, quadratic variation and increment diagnostics"}};

  CommandArgs args;
  std::string manifest;
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "Output directory")->required();
    sub->add_option("--seed", args.seed, "Override the master seed");
    sub->add_option("--workers", args.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", args.force, "Overwrite a non-empty output directory");
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  auto* rerun = app.add_subcommand("rerun", "Repeat a recorded run and compare file digests");
  rerun->add_option("--manifest", manifest, "manifest.json of the original run")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", args.out, "Output directory")->required();
  rerun->add_option("--workers", args.workers, "Worker threads")->check(CLI::PositiveNumber);
  rerun->add_flag("--force", args.force, "Overwrite a non-empty output directory");
  rerun->callback([&chosen] { chosen = "rerun"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const episcale::RunOptions options{args.out, args.force};
  try {
    if (chosen == "rerun") {
      const auto mismatched = episcale::rerun_from_manifest(manifest, options, args.workers);
      if (mismatched.empty()) {
        std::cout << "reproduced: all file digests match\n";
        return 0;
      }
      for (const auto& name : mismatched) std::cerr << "digest mismatch: " << name << '\n';
      return kExitFailure;
    }
    episcale::ExperimentConfig config = episcale::load_config(args.config);
    if (args.seed) config.seed = *args.seed;
    if (args.workers) config.workers = *args.workers;
    const auto report = episcale::run_command(chosen, config, options);
    print_series(report);
    std::cout << "wrote " << args.out << '\n';
    return 0;
  } catch (const episcale::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const episcale::OutputExistsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const episcale::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

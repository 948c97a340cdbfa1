// kwvortex: run one experiment from a JSON config and write its report.
//
//   kwvortex <solve|sweep|vortex|metric|volume|blowup> --config run.json [--out dir]
//            [--scheme fd|spectral] [--resolution N] [--seed N]
//
// Exit codes: 0 success, 2 config error, 3 solver non-convergence, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kwvortex/kwvortex.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> scheme;
  std::optional<int> resolution;
  std::optional<long long> seed;
};

int run(kwv::ExperimentKind kind, const Flags& f) {
  const kwv::RunConfig cfg = kwv::parse_config(f.config, [&](kwv::RunConfig& c) {
    if (c.experiment != kind)
      throw kwv::ConfigError("$.experiment", "config describes '" + kwv::to_string(c.experiment) +
                                                 "' but the subcommand is '" + kwv::to_string(kind) + "'");
    if (f.out) c.out_dir = *f.out;
    if (f.scheme) {
      try {
        c.scheme = kwv::parse_scheme(*f.scheme);
      } catch (const kwv::DomainError& e) {
        throw kwv::ConfigError("--scheme", e.what());
      }
    }
    if (f.resolution) c.resolution = *f.resolution;
    if (f.seed) {
      if (*f.seed < 0) throw kwv::ConfigError("--seed", "must be nonnegative");
      c.seed = static_cast<std::uint64_t>(*f.seed);
    }
  });
  const kwv::Report report = kwv::run_experiment(cfg);
  kwv::write_report(report, cfg.out_dir);
  std::printf("%s: wrote %zu tables to %s\n", kwv::to_string(kind).c_str(), report.tables.size(),
              cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone-iteration solver and adiabatic-limit experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<kwv::ExperimentKind> chosen;
  for (auto kind : {kwv::ExperimentKind::solve, kwv::ExperimentKind::sweep, kwv::ExperimentKind::vortex,
                    kwv::ExperimentKind::metric, kwv::ExperimentKind::volume, kwv::ExperimentKind::blowup}) {
    CLI::App* sub = app.add_subcommand(kwv::to_string(kind), "run a " + kwv::to_string(kind) + " experiment");
    sub->add_option("--config", flags.config, "JSON run config")->required();
    sub->add_option("--out", flags.out, "output directory (overrides output.dir)");
    sub->add_option("--scheme", flags.scheme, "solver scheme: fd or spectral");
    sub->add_option("--resolution", flags.resolution, "grid resolution per dimension");
    sub->add_option("--seed", flags.seed, "seed for random fixtures");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    return run(*chosen, flags);
  } catch (const kwv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kwv::ThresholdError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kwv::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kwv::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const kwv::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const kwv::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kwv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

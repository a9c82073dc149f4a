// Batch driver for thermal-state anneals, parameter scans, and the Ising
// benchmark. See README.md for the config schema and CSV column layouts.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pepo/run.hpp"

namespace {

struct OutStream {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit OutStream(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw pepo::ConfigError("cannot open output file " + path);
    os = &file;
  }
};

pepo::RunConfig loadConfig(const std::string& path, std::size_t workers) {
  pepo::RunConfig cfg = pepo::configFromMap(pepo::parseConfigFile(path));
  if (workers > 0) cfg.workers = workers;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermal tensor network annealing driver"};
  app.require_subcommand(1);

  std::string config_path, out_path, resume_path;
  std::size_t workers = 0;
  long seed = 0;  // reserved: no stochastic components yet
  app.add_option("--out", out_path, "output CSV path (default: stdout)");
  app.add_option("--workers", workers, "parallel workers for scans");
  app.add_option("--seed", seed, "reserved for future stochastic features");

  CLI::App* cmd_anneal = app.add_subcommand("anneal", "single anneal run");
  cmd_anneal->add_option("--config", config_path)->required();
  cmd_anneal->add_option("--resume", resume_path,
                         "checkpoint snapshot to continue from");

  CLI::App* cmd_scan =
      app.add_subcommand("scan", "mu x temperature parameter scan");
  cmd_scan->add_option("--config", config_path)->required();

  CLI::App* cmd_bench =
      app.add_subcommand("ising-bench", "annealed vs exact Ising benchmark");
  cmd_bench->add_option("--config", config_path)->required();

  CLI::App* cmd_exact = app.add_subcommand(
      "exact-ising", "measure the exact D=2 Ising representation");
  cmd_exact->add_option("--config", config_path)->required();

  CLI::App* cmd_oracle =
      app.add_subcommand("oracle", "dense small-lattice cross checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    OutStream out(out_path);
    if (cmd_anneal->parsed()) {
      pepo::RunConfig cfg = loadConfig(config_path, workers);
      if (resume_path.empty())
        pepo::runAnneal(cfg, *out.os);
      else
        pepo::runAnneal(cfg, *out.os, &resume_path);
    } else if (cmd_scan->parsed()) {
      pepo::runScan(loadConfig(config_path, workers), *out.os);
    } else if (cmd_bench->parsed()) {
      pepo::runIsingBench(loadConfig(config_path, workers), *out.os);
    } else if (cmd_exact->parsed()) {
      pepo::runExactIsing(loadConfig(config_path, workers), *out.os);
    } else if (cmd_oracle->parsed()) {
      if (!pepo::runOracleSuite(*out.os)) return 2;
    }
  } catch (const pepo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pepo::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

// cqsm <command> --config <path> [--out <dir>] [--seed <int>] [--threads <int>]

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli/run.hpp"

namespace {

int threads_from_env() {
  const char* v = std::getenv("CQSM_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw cqsm::ValidationError("CQSM_THREADS must be a positive integer");
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cqsm::cli;
  CLI::App app{"Spectral analysis of Dirac operators with chiral soliton mass terms"};
  std::string command, config_path, out_dir;
  long seed = -1;
  int threads = 0;
  bool quiet = false;
  app.add_option("command", command, "solve | bound | chain | susy-check | sector-scan | "
                                     "eps-scan | transform-check | oracle")
      ->required()
      ->check(CLI::IsMember(commands()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for stochastic methods (overrides seed)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads (default: CQSM_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "no summary on stdout");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  RunConfig cfg;
  std::string hash;
  try {
    cfg = parse_config(config_path, command);
    if (seed >= 0) {
      cfg.seed = static_cast<unsigned long>(seed);
      cfg.solver.seed = cfg.seed;
      cfg.echo["seed"] = cfg.seed;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads == 0) threads = threads_from_env();
    hash = config_hash(cfg.echo);
    const RunOutcome out = run(cfg, threads);
    write_outputs(cfg, out);
    if (!quiet) {
      std::cout << "cqsm " << command << "  config " << hash << "\n";
      for (const auto& line : out.summary) std::cout << line << "\n";
      if (out.exit_code != kExitOk)
        std::cout << "error: " << out.result["error"].get<std::string>() << "\n";
    }
    return out.exit_code;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::cerr << "cqsm: " << e.what() << "\n";
    // best effort: leave a structured record of the failure
    try {
      if (!cfg.out_dir.empty() && !command.empty()) {
        RunOutcome failed;
        failed.result = error_payload(command, hash, e.what(), code);
        write_outputs(cfg, failed);
      }
    } catch (const std::exception&) {
    }
    return code;
  }
}

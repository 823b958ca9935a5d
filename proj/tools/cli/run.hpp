// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cli/config.hpp"

namespace cqsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitInternal = 4;

struct RunOutcome {
  /// Deterministic payload: command echo, config hash, results, matvec counts.
  json result;
  /// Wall-clock data, written separately so `result` is reproducible.
  json timing;
  /// (file name, contents) pairs.
  std::vector<std::pair<std::string, std::string>> tables;
  /// Human-readable lines; every number here is also in `result`.
  std::vector<std::string> summary;
  int exit_code = kExitOk;
};

/// Executes the configured command. Library errors propagate as exceptions;
/// non-convergence is reported through `exit_code` and the payload.
RunOutcome run(const RunConfig& cfg, int threads);

/// Maps an exception to an exit code (2 validation, 3 non-convergence,
/// 4 internal).
int exit_code_for(const std::exception& e);

/// Writes result.json, timing.json and the CSV tables into cfg.out_dir.
void write_outputs(const RunConfig& cfg, const RunOutcome& out);

/// Payload for a failed run, with the error message and category.
json error_payload(const std::string& command, const std::string& hash,
                   const std::string& message, int code);

}  // namespace cqsm::cli

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqsm/bounds.hpp"
#include "cqsm/sectors.hpp"

namespace cqsm::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {
      "solve", "bound", "chain", "susy-check", "sector-scan", "eps-scan", "transform-check",
      "oracle"};
  return list;
}

struct SectorTriple {
  int l = 0;
  int s = 1;
  int t = 1;
};

/// Fully resolved run configuration. `echo` holds the same data as a JSON
/// object with every default filled in; the config hash is taken over it.
struct RunConfig {
  std::string command;
  MassField field;
  GridSpec grid;
  CylGrid cyl;
  GapSolveOptions solver;
  SchrodingerOptions schrodinger;

  double eps = 1.0;               // solve: builds H_eps when != 1
  std::vector<double> eps_list;   // eps-scan, sector-scan
  bool classify = true;           // solve: K3 labels for hedgehog fields
  std::vector<SectorTriple> sectors;
  ZSign z_sign = ZSign::Minus;

  std::string bound_method = "radial";  // radial | monte_carlo | both
  double r_max = 0.0;
  int n_quad = 24;
  long mc_samples = 1000000;

  int probe_states = 3;  // random states for residual checks
  bool dense = true;     // transform-check: dense spectra when n <= 9
  bool sector_check = true;  // oracle: dense sector equivalence

  unsigned long seed = 1234;
  std::string out_dir = "cqsm_out";
  bool csv = true;

  json echo;
};

/// Reads and validates a configuration file. `command` (from the command
/// line) must match the document's "command" field when that is present.
/// Throws ValidationError with the offending field or the parse position.
RunConfig parse_config(const std::string& path, const std::string& command);

/// Same, from an in-memory document.
RunConfig parse_config_text(const std::string& text, const std::string& command,
                            const std::string& base_dir = ".");

/// JSON text with sorted keys and numbers at 17 significant digits.
std::string dump_json(const json& j, int indent = 2);

/// 64-bit FNV-1a of the canonical (compact) echo, as 16 hex digits.
std::string config_hash(const json& echo);

}  // namespace cqsm::cli

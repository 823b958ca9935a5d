// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <string>

#include "doctest.h"

#include "cli/config.hpp"
#include "cli/run.hpp"

using namespace cqsm;
using namespace cqsm::cli;

namespace {

std::string error_of(const std::string& text, const std::string& command) {
  try {
    parse_config_text(text, command);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty document resolves to the documented defaults") {
  const auto cfg = parse_config_text("{}", "solve");
  CHECK(cfg.grid.n == 31);
  CHECK(cfg.grid.half_width == 8.0);
  CHECK(cfg.field.mass == 1.0);
  CHECK(cfg.solver.tol == 1e-8);
  CHECK(cfg.field.profile.kind() == ProfileKind::ExpI);
  CHECK(cfg.echo["command"] == "solve");
  CHECK(cfg.echo["grid"]["n"] == 31);
  CHECK(cfg.echo["field"]["profile"]["params"][0] == 0.55);
  CHECK_FALSE(cfg.echo.contains("output"));
}

TEST_CASE("validation errors name the offending field") {
  CHECK(error_of(R"({"grid": {"n": 30}})", "solve") == "config: grid.n: n must be odd");
  CHECK(error_of(R"({"eps": 0})", "solve").find("eps") != std::string::npos);
  CHECK(error_of(R"({"grid": {"nn": 31}})", "solve").find("grid.nn") != std::string::npos);
  CHECK(error_of(R"({"field": {"mass": -1}})", "solve").find("field.mass") != std::string::npos);
  CHECK(error_of(R"({"command": "bound"})", "solve").find("command") != std::string::npos);
  CHECK(error_of(R"({"eps_list": [1.0]})", "solve").find("eps_list") != std::string::npos);
  CHECK(error_of(R"({"grid": {"n": 11}, "sector_check": true})", "oracle").find("n") !=
        std::string::npos);
}

TEST_CASE("parse errors report line and column") {
  const std::string msg = error_of("{\n  \"grid\": {\n    \"n\": ,\n  }\n}", "solve");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("config hash depends on resolved content, not spelling") {
  const auto a = parse_config_text("{}", "solve");
  const auto b = parse_config_text(R"({"grid": {"half_width": 8.0, "n": 31}})", "solve");
  const auto c = parse_config_text(R"({"grid": {"n": 33}})", "solve");
  const auto d = parse_config_text(R"({"output": {"dir": "elsewhere"}})", "solve");
  CHECK(config_hash(a.echo) == config_hash(b.echo));
  CHECK(config_hash(a.echo) != config_hash(c.echo));
  CHECK(config_hash(a.echo) == config_hash(d.echo));
  CHECK(config_hash(a.echo).size() == 16);
}

TEST_CASE("JSON dump sorts keys and keeps 17 digits") {
  const json j = {{"b", 0.1}, {"a", 1.0}, {"c", 3}};
  CHECK(dump_json(j, -1) == R"({"a":1.0,"b":0.10000000000000001,"c":3})");
  CHECK(dump_json(json{{"x", std::nan("")}}, -1) == R"({"x":null})");
}

TEST_CASE("shipped configurations parse") {
  namespace fs = std::filesystem;
  int count = 0;
  for (const auto& e : fs::directory_iterator(CQSM_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    const std::string stem = e.path().stem().string();
    const std::string command = stem == "minimal" ? "solve" : stem;
    CAPTURE(stem);
    CHECK_NOTHROW(parse_config(e.path().string(), command));
    ++count;
  }
  CHECK(count >= 9);
}

TEST_CASE("free field solve reports no gap levels and exits 0") {
  const auto cfg = parse_config_text(
      R"({"field": {"profile": {"kind": "AmplitudeScaled", "base": {"kind": "ExpI"},
                                "amplitude": 0.0}},
          "grid": {"n": 7, "half_width": 4.0}})",
      "solve");
  const auto out = run(cfg, 1);
  CHECK(out.exit_code == kExitOk);
  CHECK(out.result["payload"]["eigenvalues"].empty());
  CHECK(out.result["error"].is_null());
  CHECK(out.result["config_hash"] == config_hash(cfg.echo));
}

TEST_CASE("exit codes by error category") {
  CHECK(exit_code_for(ValidationError("x")) == kExitValidation);
  CHECK(exit_code_for(ConvergenceError("x")) == kExitNoConvergence);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitInternal);
  const auto p = error_payload("solve", "", "bad", kExitValidation);
  CHECK(p["error_kind"] == "validation");
  CHECK(p["config_hash"].is_null());
}

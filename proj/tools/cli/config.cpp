// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cqsm::cli {

namespace {

/// Object view that remembers which keys were read, so unknown keys can be
/// rejected instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  long integer(const std::string& key, long def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(key, "must be an integer");
    return v.get<long>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "must be an array of numbers");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) fail(key, "entries must be finite");
    }
    return out;
  }

  Section sub(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Section(empty, name(key));
    return Section(raw(key), name(key));
  }

  /// Throws on any key that was never read.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(k, "unknown key");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ValidationError("config: " + name(key) + ": " + what);
  }

  std::string name(const std::string& key) const {
    if (key.empty()) return path_.empty() ? std::string("document") : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Profile parse_profile(Section sec, const std::string& base_dir, json& echo) {
  const std::string kind = sec.string("kind", "ExpI");
  const double unit = sec.number("length_unit", 1.0);
  if (!(unit > 0.0)) sec.fail("length_unit", "must be > 0");
  echo["kind"] = kind;
  echo["length_unit"] = unit;
  Profile p;
  auto params = [&](std::vector<double> def) {
    auto v = sec.numbers("params", def);
    if (v.size() != def.size())
      sec.fail("params", "needs " + std::to_string(def.size()) + " values for " + kind);
    for (double x : v)
      if (!(x > 0.0)) sec.fail("params", "must be > 0");
    echo["params"] = v;
    return v;
  };
  if (kind == "ExpI") {
    p = Profile::exp_i(params({0.55})[0]);
  } else if (kind == "MixedII") {
    const auto v = params({0.65, 0.58, 0.35, 0.5477225575051661});
    p = Profile::mixed_ii(v[0], v[1], v[2], v[3]);
  } else if (kind == "RationalIII") {
    p = Profile::rational_iii(params({0.6324555320336759})[0]);
  } else if (kind == "CustomRadial") {
    if (sec.has("csv")) {
      std::filesystem::path file(sec.string("csv", ""));
      if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
      if (!std::filesystem::exists(file)) sec.fail("csv", "file not found: " + file.string());
      p = Profile::load_csv(file.string());
      echo["csv"] = file.lexically_normal().string();
    } else {
      const auto r = sec.numbers("radii", {});
      const auto v = sec.numbers("values", {});
      if (r.empty()) sec.fail("radii", "or csv is required for CustomRadial");
      p = Profile::custom_radial(r, v);
    }
    echo["radii"] = p.table_radii();
    echo["values"] = p.table_values();
  } else if (kind == "AmplitudeScaled") {
    if (!sec.has("base")) sec.fail("base", "is required for AmplitudeScaled");
    json base_echo;
    const Profile base = parse_profile(sec.sub("base"), base_dir, base_echo);
    const double a = sec.number("amplitude", 1.0);
    echo["base"] = base_echo;
    echo["amplitude"] = a;
    p = Profile::amplitude_scaled(base, a);
  } else {
    sec.fail("kind", "must be one of ExpI, MixedII, RationalIII, CustomRadial, "
                     "AmplitudeScaled");
  }
  sec.finish();
  return p.with_length_unit(unit);
}

IsoField parse_hedgehog(Section sec, json& echo) {
  const std::string kind = lower(sec.string("kind", "polar"));
  echo["kind"] = kind;
  IsoField f;
  if (kind == "polar" || kind == "z_tanh") {
    const long m = sec.integer("m", 1);
    if (m < 1) sec.fail("m", "must be a positive integer");
    echo["m"] = m;
    if (kind == "polar") {
      f = IsoField::polar(static_cast<int>(m));
    } else {
      const double w = sec.number("width", 1.0);
      if (!(w > 0.0)) sec.fail("width", "must be > 0");
      echo["width"] = w;
      f = IsoField::z_tanh(w, static_cast<int>(m));
    }
  } else if (kind == "constant") {
    const auto d = sec.numbers("direction", {0.0, 0.0, 1.0});
    if (d.size() != 3) sec.fail("direction", "must have three entries");
    const Vec3 v(d[0], d[1], d[2]);
    if (std::abs(v.norm() - 1.0) > 1e-12) sec.fail("direction", "must be a unit vector");
    echo["direction"] = d;
    f = IsoField::constant(v);
  } else if (kind == "susy") {
    const double c = sec.number("c", 1.0);
    echo["c"] = c;
    f = IsoField::susy_example(c);
  } else {
    sec.fail("kind", "must be one of polar, z_tanh, constant, susy");
  }
  sec.finish();
  return f;
}

IsoSpinTriple parse_triple(Section sec, json& echo) {
  const std::string kind = lower(sec.string("kind", "pauli"));
  if (kind != "pauli") sec.fail("kind", "must be pauli");
  const long copies = sec.integer("copies", 1);
  if (copies < 1 || copies > 8) sec.fail("copies", "must be in 1..8");
  echo["kind"] = kind;
  echo["copies"] = copies;
  sec.finish();
  return copies == 1 ? pauli_triple() : tensor_with_identity(pauli_triple(), static_cast<int>(copies));
}

void check_eps(const Section& sec, const std::string& key, double e) {
  if (!(e > 0.0)) sec.fail(key, "values must be > 0");
}

RunConfig build(const json& doc, const std::string& command, const std::string& base_dir) {
  if (std::find(commands().begin(), commands().end(), command) == commands().end())
    throw ValidationError("unknown command '" + command + "'");
  Section top(doc, "");
  RunConfig cfg;
  cfg.command = command;
  if (top.has("command") && top.string("command", "") != command)
    top.fail("command", "does not match the requested command '" + command + "'");
  json& echo = cfg.echo;
  echo["command"] = command;

  // field
  {
    Section fs = top.sub("field");
    json fe;
    cfg.field.profile = parse_profile(fs.sub("profile"), base_dir, fe["profile"]);
    cfg.field.iso = parse_hedgehog(fs.sub("hedgehog"), fe["hedgehog"]);
    cfg.field.triple = parse_triple(fs.sub("triple"), fe["triple"]);
    cfg.field.mass = fs.number("mass", 1.0);
    if (!(cfg.field.mass > 0.0)) fs.fail("mass", "must be > 0");
    fe["mass"] = cfg.field.mass;
    fs.finish();
    cfg.field.validate();
    echo["field"] = fe;
  }
  // grid
  {
    Section gs = top.sub("grid");
    const long n = gs.integer("n", 31);
    if (n % 2 == 0) gs.fail("n", "n must be odd");
    if (n < 5) gs.fail("n", "must be >= 5");
    cfg.grid.n = static_cast<int>(n);
    cfg.grid.half_width = gs.number("half_width", 8.0);
    if (!(cfg.grid.half_width > 0.0)) gs.fail("half_width", "must be > 0");
    gs.finish();
    echo["grid"] = {{"n", n}, {"half_width", cfg.grid.half_width}};
  }
  // solver
  {
    Section ss = top.sub("solver");
    auto& o = cfg.solver;
    o.tol = ss.number("tol", 1e-8);
    if (!(o.tol > 0.0)) ss.fail("tol", "must be > 0");
    o.max_pairs = static_cast<int>(ss.integer("max_pairs", 64));
    if (o.max_pairs < 1) ss.fail("max_pairs", "must be >= 1");
    o.max_iterations = static_cast<int>(ss.integer("max_iterations", 3000));
    if (o.max_iterations < 1) ss.fail("max_iterations", "must be >= 1");
    o.initial_block = static_cast<int>(ss.integer("initial_block", 12));
    if (o.initial_block < 4) ss.fail("initial_block", "must be >= 4");
    o.edge_fraction = ss.number("edge_fraction", 0.02);
    if (!(o.edge_fraction > 0.0 && o.edge_fraction < 0.5))
      ss.fail("edge_fraction", "must be in (0, 0.5)");
    o.memory_budget_mb = ss.number("memory_budget_mb", 2500.0);
    if (!(o.memory_budget_mb > 0.0)) ss.fail("memory_budget_mb", "must be > 0");
    const std::string method = lower(ss.string("method", "auto"));
    if (method == "auto") o.method = SolveMethod::Auto;
    else if (method == "iterative") o.method = SolveMethod::Iterative;
    else if (method == "dense") o.method = SolveMethod::Dense;
    else ss.fail("method", "must be auto, iterative or dense");
    o.dense_limit = static_cast<std::size_t>(ss.integer("dense_limit", 6000));
    ss.finish();
    cfg.schrodinger.tol = o.tol;
    cfg.schrodinger.edge_fraction = o.edge_fraction;
    cfg.schrodinger.max_levels = o.max_pairs;
    echo["solver"] = {{"tol", o.tol},
                      {"max_pairs", o.max_pairs},
                      {"max_iterations", o.max_iterations},
                      {"initial_block", o.initial_block},
                      {"edge_fraction", o.edge_fraction},
                      {"memory_budget_mb", o.memory_budget_mb},
                      {"method", method},
                      {"dense_limit", o.dense_limit}};
  }
  cfg.seed = static_cast<unsigned long>(top.integer("seed", 1234));
  cfg.solver.seed = cfg.seed;
  echo["seed"] = cfg.seed;

  // command specific sections
  if (command == "solve") {
    cfg.eps = top.number("eps", 1.0);
    check_eps(top, "eps", cfg.eps);
    cfg.classify = top.boolean("classify", true);
    echo["eps"] = cfg.eps;
    echo["classify"] = cfg.classify;
  }
  if (command == "eps-scan" || command == "sector-scan") {
    cfg.eps_list = top.numbers("eps_list", {1.0, 0.5, 0.25, 0.125, 0.0625});
    if (cfg.eps_list.empty()) top.fail("eps_list", "must not be empty");
    for (double e : cfg.eps_list) check_eps(top, "eps_list", e);
    echo["eps_list"] = cfg.eps_list;
  }
  if (command == "sector-scan") {
    Section cs = top.sub("cyl_grid");
    cfg.cyl.r_max = cs.number("r_max", 8.0);
    cfg.cyl.z_max = cs.number("z_max", 8.0);
    cfg.cyl.n_r = static_cast<int>(cs.integer("n_r", 80));
    cfg.cyl.n_z = static_cast<int>(cs.integer("n_z", 160));
    cs.finish();
    cfg.cyl.validate();
    echo["cyl_grid"] = {{"r_max", cfg.cyl.r_max},
                        {"z_max", cfg.cyl.z_max},
                        {"n_r", cfg.cyl.n_r},
                        {"n_z", cfg.cyl.n_z}};
    json list = json::array();
    if (top.has("sectors")) {
      const json& arr = top.raw("sectors");
      if (!arr.is_array() || arr.empty()) top.fail("sectors", "must be a non-empty array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section e(arr[i], "sectors[" + std::to_string(i) + "]");
        SectorTriple st;
        st.l = static_cast<int>(e.integer("l", 0));
        st.s = static_cast<int>(e.integer("s", 1));
        st.t = static_cast<int>(e.integer("t", 1));
        if (st.s != 1 && st.s != -1) e.fail("s", "must be +1 or -1");
        if (st.t != 1 && st.t != -1) e.fail("t", "must be +1 or -1");
        e.finish();
        cfg.sectors.push_back(st);
      }
    } else {
      cfg.sectors = {{0, 1, 1}, {0, -1, 1}, {1, 1, 1}, {-1, 1, 1}};
    }
    for (const auto& st : cfg.sectors) list.push_back({{"l", st.l}, {"s", st.s}, {"t", st.t}});
    echo["sectors"] = list;
    const std::string zs = lower(top.string("z_sign", "minus"));
    if (zs != "minus" && zs != "plus") top.fail("z_sign", "must be minus or plus");
    cfg.z_sign = zs == "minus" ? ZSign::Minus : ZSign::Plus;
    echo["z_sign"] = zs;
  }
  if (command == "bound" || command == "chain") {
    Section bs = top.sub("bound");
    cfg.bound_method = lower(bs.string("method", command == "chain" ? "both" : "radial"));
    if (cfg.bound_method != "radial" && cfg.bound_method != "monte_carlo" &&
        cfg.bound_method != "both")
      bs.fail("method", "must be radial, monte_carlo or both");
    cfg.r_max = bs.number("r_max", 0.0);
    if (cfg.r_max < 0.0) bs.fail("r_max", "must be >= 0 (0 selects 30 profile scales)");
    cfg.n_quad = static_cast<int>(bs.integer("n_quad", 24));
    if (cfg.n_quad < 4) bs.fail("n_quad", "must be >= 4");
    cfg.mc_samples = bs.integer("mc_samples", 1000000);
    if (cfg.mc_samples < 1000) bs.fail("mc_samples", "must be >= 1000");
    bs.finish();
    echo["bound"] = {{"method", cfg.bound_method},
                     {"r_max", cfg.r_max},
                     {"n_quad", cfg.n_quad},
                     {"mc_samples", cfg.mc_samples}};
  }
  if (command == "susy-check" || command == "transform-check" || command == "oracle") {
    cfg.probe_states = static_cast<int>(top.integer("probe_states", 3));
    if (cfg.probe_states < 1) top.fail("probe_states", "must be >= 1");
    echo["probe_states"] = cfg.probe_states;
  }
  if (command == "transform-check") {
    cfg.dense = top.boolean("dense", true);
    echo["dense"] = cfg.dense;
  }
  if (command == "oracle") {
    if (cfg.grid.n > 9) top.fail("grid", "oracle needs n <= 9");
    cfg.sector_check = top.boolean("sector_check", true);
    echo["sector_check"] = cfg.sector_check;
  }
  {
    Section os = top.sub("output");
    cfg.out_dir = os.string("dir", "cqsm_out");
    cfg.csv = os.boolean("csv", true);
    os.finish();
  }
  top.finish();
  return cfg;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& command,
                            const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into a line and column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
  }
  return build(doc, command, base_dir);
}

RunConfig parse_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config_text(ss.str(), command, dir.empty() ? "." : dir.string());
}

namespace {

void write_json(std::string& out, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(indent * (depth + 1), ' ') : "";
  const std::string end = indent > 0 ? "\n" + std::string(indent * depth, ' ') : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += pad + json(k).dump() + sep;
        write_json(out, v, indent, depth + 1);
      }
      out += end + '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        write_json(out, v, indent, depth + 1);
      }
      out += end + ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      // keep a float marker so readers do not see an integer
      if (std::string(buf).find_first_of(".eEn") == std::string::npos) out += ".0";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  write_json(out, j, indent, 0);
  return out;
}

std::string config_hash(const json& echo) {
  const std::string text = dump_json(echo, 0);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cqsm::cli

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

namespace cqsm::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json info_json(const SolverInfo& i) {
  return {{"method", i.method},       {"iterations", i.iterations},
          {"matvecs", i.matvecs},     {"tolerance", i.tolerance},
          {"block_size", i.block_size}, {"converged", i.converged},
          {"truncated", i.truncated}};
}

json spectrum_json(const SpectrumResult& r) {
  return {{"n_h", r.eigenvalues.size()},
          {"eigenvalues", r.eigenvalues},
          {"residual_norms", r.residual_norms},
          {"edge_values", r.edge_values},
          {"gap_mass", r.gap_mass},
          {"edge_delta", r.edge_delta},
          {"folded_count", r.folded_count},
          {"solver", info_json(r.info)}};
}

json bound_json(const BoundReport& b) {
  return {{"method", to_string(b.method)},
          {"c_f", b.c_f},
          {"n_h_bound", b.n_h_bound},
          {"error_estimate", b.quadrature_error_estimate},
          {"tail_bound", b.tail_bound},
          {"samples", b.samples},
          {"seed", b.seed},
          {"r_max", b.r_max},
          {"n_quad", b.n_quad}};
}

bool is_hedgehog(const MassField& mf) {
  return mf.iso.kind() == IsoFieldKind::Polar || mf.iso.kind() == IsoFieldKind::Custom;
}

StateVector probe_state(const GridSpec& g, int dim, unsigned long seed) {
  // smooth, off-centre and seeded: a Gaussian with a random internal vector
  const StateVector r = StateVector::random(GridSpec{1.0, 5}, dim, seed);
  CVec internal(dim);
  for (int c = 0; c < dim; ++c) internal[c] = r(0, c);
  internal.normalize();
  const double w = std::max(0.6, 0.1 * g.half_width);
  return StateVector::gaussian(g, dim, Vec3(0.25 * g.half_width, 0.125 * g.half_width, 0.0),
                               w, internal);
}

std::string spectrum_csv(const SpectrumResult& r, const std::vector<SectorLabel>* labels) {
  std::string s = "index,lambda,residual,sector_l,sector_s,sector_t,k3_variance\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    s += std::to_string(i) + "," + num(r.eigenvalues[i]) + "," + num(r.residual_norms[i]);
    if (labels && i < labels->size()) {
      const auto& l = (*labels)[i];
      s += "," + std::to_string(l.l) + "," + std::to_string(l.s) + "," + std::to_string(l.t) +
           "," + num(l.k3_variance);
    } else {
      s += ",,,,";
    }
    s += "\n";
  }
  return s;
}

void run_solve(const RunConfig& cfg, RunOutcome& out) {
  const auto alg = weyl_matrices();
  const auto h = cfg.eps == 1.0 ? assemble_H(cfg.grid, cfg.field, alg)
                                : assemble_H_eps(cfg.grid, cfg.field, alg, cfg.eps);
  const bool classify = cfg.classify && is_hedgehog(cfg.field);
  GapSolveOptions opt = cfg.solver;
  opt.keep_vectors = classify;
  auto res = gap_eigenvalues(h, opt);
  json p = spectrum_json(res);
  const auto ground = ground_energies(res);
  p["e0_plus"] = ground.e0_plus;
  p["e0_minus"] = ground.e0_minus;
  std::vector<SectorLabel> labels;
  if (classify) {
    const int m = cfg.field.iso.winding();
    const auto k3 = assemble_K3(cfg.grid, alg, cfg.field.triple, m);
    labels = classify_by_k3(res, k3, alg, cfg.field.triple, m, 1e-4);
    json arr = json::array();
    for (const auto& l : labels)
      arr.push_back({{"l", l.l},
                     {"s", l.s},
                     {"t", l.t},
                     {"k3_value", l.k3_value},
                     {"k3_mean", l.k3_mean},
                     {"k3_variance", l.k3_variance},
                     {"mixed", l.mixed}});
    p["sectors"] = arr;
  }
  out.result["payload"] = p;
  out.tables.emplace_back("eigenvalues.csv", spectrum_csv(res, classify ? &labels : nullptr));
  out.summary.push_back("N_H = " + std::to_string(res.eigenvalues.size()) + " gap eigenvalues (" +
                        res.info.method + ")");
  for (double v : res.eigenvalues) out.summary.push_back("  lambda = " + num(v));
  if (!res.info.converged || res.info.truncated) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = res.info.truncated ? "gap spectrum truncated: increase max_pairs"
                                             : "gap solver did not converge";
  }
}

double resolved_r_max(const RunConfig& cfg) {
  return cfg.r_max > 0.0 ? cfg.r_max : 30.0 * cfg.field.profile.scale();
}

void run_bound(const RunConfig& cfg, int threads, RunOutcome& out) {
  json p;
  std::optional<BoundReport> radial, mc;
  if (cfg.bound_method != "monte_carlo") {
    radial = cf_radial(cfg.field, resolved_r_max(cfg), cfg.n_quad);
    p["radial"] = bound_json(*radial);
    out.summary.push_back("C_F (radial) = " + num(radial->c_f) + ", bound = " +
                          num(radial->n_h_bound));
  }
  if (cfg.bound_method != "radial") {
    mc = cf_monte_carlo(cfg.field, cfg.mc_samples, cfg.seed, threads);
    p["monte_carlo"] = bound_json(*mc);
    out.summary.push_back("C_F (Monte Carlo) = " + num(mc->c_f) + " +- " +
                          num(mc->quadrature_error_estimate));
  }
  if (radial && mc) {
    const double diff = std::abs(radial->c_f - mc->c_f);
    p["agreement"] = {{"abs_difference", diff},
                      {"sigmas", diff / mc->quadrature_error_estimate},
                      {"relative", diff / std::abs(radial->c_f)}};
  }
  out.result["payload"] = p;
}

void run_chain(const RunConfig& cfg, int threads, RunOutcome& out) {
  ChainOptions opt;
  opt.gap = cfg.solver;
  opt.gap.keep_vectors = false;
  opt.schrodinger = cfg.schrodinger;
  opt.schrodinger.seed = cfg.seed + 1;
  opt.r_max = cfg.r_max;
  opt.n_quad = cfg.n_quad;
  opt.mc_samples = cfg.bound_method == "radial" ? 0 : cfg.mc_samples;
  opt.mc_seed = cfg.seed;
  opt.threads = threads;
  const auto c = bound_chain_report(cfg.field, cfg.grid, opt);
  json p = {{"n_h", c.n_h},
            {"n_minus_L", c.n_l},
            {"n_minus_L0", c.n_l0},
            {"bound", c.bound},
            {"chain", {c.n_h, c.n_l, c.n_l0, c.bound}},
            {"holds", c.holds},
            {"stable", c.stable},
            {"complete", c.complete},
            {"note", c.note},
            {"c_f", bound_json(c.c_f)}};
  if (c.have_mc) p["c_f_monte_carlo"] = bound_json(c.c_f_mc);
  out.result["payload"] = p;
  std::string csv = "quantity,value\n";
  csv += "N_H," + std::to_string(c.n_h) + "\n";
  csv += "N_minus_L," + std::to_string(c.n_l) + "\n";
  csv += "N_minus_L0," + std::to_string(c.n_l0) + "\n";
  csv += "bound," + num(c.bound) + "\n";
  csv += "C_F," + num(c.c_f.c_f) + "\n";
  csv += "C_F_error," + num(c.c_f.quadrature_error_estimate) + "\n";
  if (c.have_mc) {
    csv += "C_F_monte_carlo," + num(c.c_f_mc.c_f) + "\n";
    csv += "C_F_monte_carlo_std_error," + num(c.c_f_mc.quadrature_error_estimate) + "\n";
  }
  csv += std::string("holds,") + (c.holds ? "1" : "0") + "\n";
  out.tables.emplace_back("chain.csv", csv);
  out.summary.push_back("N_H = " + std::to_string(c.n_h) + " <= N-(L) = " +
                        std::to_string(c.n_l) + " <= N-(L0) = " + std::to_string(c.n_l0) +
                        " <= " + num(c.bound) + (c.holds ? "  (holds)" : "  (VIOLATED)"));
  if (!c.complete) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = c.note;
  }
}

void run_susy(const RunConfig& cfg, RunOutcome& out) {
  if (cfg.field.iso.kind() != IsoFieldKind::SusyExample)
    throw ValidationError("susy-check needs field.hedgehog.kind = susy");
  const auto alg = weyl_matrices();
  const auto xi = make_xi(cfg.field.iso.susy_c(), cfg.field.triple);
  const auto h = assemble_H(cfg.grid, cfg.field, alg);
  const auto gamma = assemble_Gamma(cfg.grid, alg, xi);
  json p;
  p["in_family"] = in_susy_family(cfg.grid, cfg.field, xi);
  std::vector<double> anti;
  for (int i = 0; i < cfg.probe_states; ++i)
    anti.push_back(susy_residual(
        h, gamma, StateVector::random(cfg.grid, h.internal_dim(), cfg.seed + 101 * i)));
  p["anticommutator_residuals"] = anti;
  GapSolveOptions opt = cfg.solver;
  opt.keep_vectors = true;
  const auto res = gap_eigenvalues(h, opt);
  p["spectrum"] = spectrum_json(res);
  const auto pair = check_pair_symmetry(res.eigenvalues, 1e-7);
  p["pairing"] = {{"matched", pair.matched},
                  {"max_mismatch", pair.max_mismatch},
                  {"multiplicities_agree", pair.multiplicities_agree},
                  {"positive", pair.positive},
                  {"negative", pair.negative},
                  {"near_zero", pair.near_zero}};
  p["partner_residuals"] = grading_partner_residuals(h, gamma, res);
  const auto kp = kernel_probe(res, gamma, 1e-6);
  p["kernel_probe"] = {{"dim_kernel", kp.dim_kernel},
                       {"gamma_plus", kp.gamma_plus},
                       {"gamma_minus", kp.gamma_minus},
                       {"index_estimate", kp.index_estimate},
                       {"experimental", true}};
  out.result["payload"] = p;
  out.tables.emplace_back("eigenvalues.csv", spectrum_csv(res, nullptr));
  double worst = 0.0;
  for (double a : anti) worst = std::max(worst, a);
  out.summary.push_back("max |{Gamma, H} psi| / |psi| = " + num(worst));
  out.summary.push_back("gap levels " + std::to_string(res.eigenvalues.size()) +
                        ", pairing mismatch " + num(pair.max_mismatch) +
                        (pair.matched ? " (paired)" : " (NOT paired)"));
  if (!res.info.converged || res.info.truncated) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = "gap solver did not converge";
  }
}

void run_sector_scan(const RunConfig& cfg, RunOutcome& out) {
  if (!is_hedgehog(cfg.field))
    throw ValidationError("sector-scan needs a hedgehog field (polar or z_tanh)");
  const auto g = axial_from_radial(cfg.field.profile);
  json rows = json::array();
  std::string csv = "l,s,t,eps,E0,converged\n";
  bool all_converged = true;
  const double tol = std::min(cfg.solver.tol, 1e-8);
  for (const auto& st : cfg.sectors) {
    const auto scan = sector_epsilon_scan(g, st.l, st.s, st.t, cfg.field.mass, cfg.eps_list,
                                          cfg.cyl, tol, cfg.z_sign);
    for (const auto& e : scan) {
      json row = {{"l", e.l},   {"s", e.s},   {"t", e.t},
                  {"eps", e.eps}, {"e0", e.e0}, {"converged", e.converged}};
      if (!e.error.empty()) row["error"] = e.error;
      rows.push_back(row);
      all_converged = all_converged && e.converged;
      csv += std::to_string(e.l) + "," + std::to_string(e.s) + "," + std::to_string(e.t) + "," +
             num(e.eps) + "," + num(e.e0) + "," + (e.converged ? "1" : "0") + "\n";
      out.summary.push_back("l=" + std::to_string(e.l) + " s=" + std::to_string(e.s) +
                            " t=" + std::to_string(e.t) + " eps=" + num(e.eps) +
                            " E0=" + num(e.e0));
    }
  }
  out.result["payload"] = {{"rows", rows}, {"tolerance", tol}};
  out.tables.emplace_back("sector_scan.csv", csv);
  if (!all_converged) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = "a sector ground state did not converge";
  }
}

void run_eps_scan(const RunConfig& cfg, RunOutcome& out) {
  const auto alg = weyl_matrices();
  GapSolveOptions opt = cfg.solver;
  opt.keep_vectors = false;
  const auto scan = scan_epsilon(cfg.grid, cfg.field, alg, cfg.eps_list, opt);
  json rows = json::array();
  std::string csv = "eps,n_h,e0_plus,e0_minus,converged,truncated\n";
  bool ok = true;
  std::optional<double> first;
  bool persists = false;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto& e = scan[i];
    json row = {{"eps", e.eps},
                {"n_h", e.n_h},
                {"e0_plus", e.ground.e0_plus},
                {"e0_minus", e.ground.e0_minus},
                {"converged", e.converged},
                {"truncated", e.truncated},
                {"solver", info_json(e.spectrum.info)}};
    if (!e.error.empty()) row["error"] = e.error;
    rows.push_back(row);
    // a truncated entry still bounds N from below (Ritz values are upper bounds)
    ok = ok && (e.converged || e.truncated) && e.error.empty();
    if (e.n_h >= 1 && !first) {
      first = e.eps;
      persists = i + 1 < scan.size() && scan[i + 1].n_h >= 1;
    }
    csv += num(e.eps) + "," + std::to_string(e.n_h) + "," + num(e.ground.e0_plus) + "," +
           num(e.ground.e0_minus) + "," + (e.converged ? "1" : "0") + "," +
           (e.truncated ? "1" : "0") + "\n";
    out.summary.push_back("eps=" + num(e.eps) + "  N_H" + (e.truncated ? " >= " : " = ") +
                          std::to_string(e.n_h));
  }
  json p = {{"rows", rows}, {"emergence_persists", persists}};
  p["first_eps_with_state"] = first ? json(*first) : json(nullptr);
  out.result["payload"] = p;
  out.tables.emplace_back("eps_scan.csv", csv);
  if (!ok) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = "an eps entry did not converge";
  }
}

void run_transform(const RunConfig& cfg, RunOutcome& out) {
  if (!cfg.field.iso.is_constant())
    throw ValidationError("transform-check needs field.hedgehog.kind = constant");
  const auto alg = weyl_matrices();
  const auto h = assemble_H(cfg.grid, cfg.field, alg);
  const auto hb = assemble_HB(cfg.grid, cfg.field, alg);
  const auto xf = assemble_XF(cfg.grid, cfg.field, alg);
  json p;
  std::vector<double> res;
  for (int i = 0; i < cfg.probe_states; ++i)
    res.push_back(xf_conjugation_residual(
        h, hb, xf, probe_state(cfg.grid, h.internal_dim(), cfg.seed + 7 * i)));
  p["conjugation_residuals"] = res;
  out.summary.push_back("|X_F H X_F^* psi - H(B) psi| / |psi| = " + num(res[0]));
  if (cfg.dense && cfg.grid.n <= 9) {
    const CMat a = to_dense(h), b = to_dense(hb), x = to_dense(xf);
    const auto ea = dense_eigenvalues(a), eb = dense_eigenvalues(b);
    const auto ec = dense_eigenvalues(CMat(x * a * x.adjoint()));
    double d_hb = 0.0, d_conj = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
      d_hb = std::max(d_hb, std::abs(ea[i] - eb[i]));
      d_conj = std::max(d_conj, std::abs(ea[i] - ec[i]));
    }
    p["dense"] = {{"max_diff_H_vs_HB", d_hb}, {"max_diff_H_vs_conjugated_H", d_conj},
                  {"dimension", a.rows()}};
    out.summary.push_back("dense spectra: max |lambda(H) - lambda(H(B))| = " + num(d_hb));
    out.summary.push_back("dense spectra: max |lambda(H) - lambda(X_F H X_F^*)| = " +
                          num(d_conj));
  }
  out.result["payload"] = p;
}

void run_oracle(const RunConfig& cfg, RunOutcome& out) {
  const auto alg = weyl_matrices();
  const auto h = assemble_H(cfg.grid, cfg.field, alg);
  GapSolveOptions dense = cfg.solver, iter = cfg.solver;
  dense.method = SolveMethod::Dense;
  iter.method = SolveMethod::Iterative;
  dense.keep_vectors = iter.keep_vectors = false;
  const auto rd = gap_eigenvalues(h, dense);
  const auto ri = gap_eigenvalues(h, iter);
  json p = {{"dense", spectrum_json(rd)}, {"iterative", spectrum_json(ri)}};
  const bool same_count = rd.eigenvalues.size() == ri.eigenvalues.size();
  double diff = same_count ? 0.0 : std::numeric_limits<double>::infinity();
  if (same_count)
    for (std::size_t i = 0; i < rd.eigenvalues.size(); ++i)
      diff = std::max(diff, std::abs(rd.eigenvalues[i] - ri.eigenvalues[i]));
  p["same_count"] = same_count;
  p["max_difference"] = diff;
  out.summary.push_back("dense N_H = " + std::to_string(rd.eigenvalues.size()) +
                        ", iterative N_H = " + std::to_string(ri.eigenvalues.size()) +
                        ", max difference " + num(diff));
  if (cfg.sector_check && is_hedgehog(cfg.field)) {
    const auto rep = sector_equivalence_check(cfg.grid, cfg.field, alg,
                                              cfg.field.iso.winding(), 1e-6);
    json blocks = json::array();
    for (const auto& b : rep.blocks)
      blocks.push_back({{"k3_class", b.k3_class}, {"dim", b.dim}});
    p["sectors"] = {{"off_block_residual", rep.off_block_residual},
                    {"spectrum_mismatch", rep.spectrum_mismatch},
                    {"k3_commutator", rep.k3_commutator},
                    {"k3_class_disagreements", rep.k3_class_disagreements},
                    {"blocks", blocks},
                    {"passed", rep.passed}};
    out.summary.push_back("sector off-block residual " + num(rep.off_block_residual) +
                          ", spectrum mismatch " + num(rep.spectrum_mismatch));
  }
  out.result["payload"] = p;
  if (!ri.info.converged) {
    out.exit_code = kExitNoConvergence;
    out.result["error"] = "iterative solver did not converge";
  }
}

}  // namespace

RunOutcome run(const RunConfig& cfg, int threads) {
  RunOutcome out;
  const std::string hash = config_hash(cfg.echo);
  out.result = {{"tool", "cqsm"},
                {"version", kVersion},
                {"command", cfg.command},
                {"config_hash", hash},
                {"config", cfg.echo},
                {"error", nullptr}};
  const auto t0 = std::chrono::steady_clock::now();
  static const std::map<std::string, std::function<void(const RunConfig&, int, RunOutcome&)>>
      table = {
          {"solve", [](const RunConfig& c, int, RunOutcome& o) { run_solve(c, o); }},
          {"bound", run_bound},
          {"chain", run_chain},
          {"susy-check", [](const RunConfig& c, int, RunOutcome& o) { run_susy(c, o); }},
          {"sector-scan",
           [](const RunConfig& c, int, RunOutcome& o) { run_sector_scan(c, o); }},
          {"eps-scan", [](const RunConfig& c, int, RunOutcome& o) { run_eps_scan(c, o); }},
          {"transform-check",
           [](const RunConfig& c, int, RunOutcome& o) { run_transform(c, o); }},
          {"oracle", [](const RunConfig& c, int, RunOutcome& o) { run_oracle(c, o); }},
      };
  table.at(cfg.command)(cfg, threads, out);
  out.result["exit_code"] = out.exit_code;
  out.timing = {{"wall_seconds",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                {"threads", threads},
                {"config_hash", hash}};
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return kExitNoConvergence;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const OutOfRangeError*>(&e) ||
      dynamic_cast<const UnsupportedConfiguration*>(&e) ||
      dynamic_cast<const HypothesisViolation*>(&e) ||
      dynamic_cast<const SingularPointError*>(&e) || dynamic_cast<const DimensionMismatch*>(&e))
    return kExitValidation;
  return kExitInternal;
}

json error_payload(const std::string& command, const std::string& hash,
                   const std::string& message, int code) {
  const char* kind = code == kExitValidation       ? "validation"
                     : code == kExitNoConvergence ? "non_convergence"
                                                  : "internal";
  return {{"tool", "cqsm"},
          {"version", kVersion},
          {"command", command},
          {"config_hash", hash.empty() ? json(nullptr) : json(hash)},
          {"error", message},
          {"error_kind", kind},
          {"exit_code", code}};
}

void write_outputs(const RunConfig& cfg, const RunOutcome& out) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (fs::path(cfg.out_dir) / name).string());
    f << text;
  };
  write("result.json", dump_json(out.result) + "\n");
  write("timing.json", dump_json(out.timing) + "\n");
  if (cfg.csv)
    for (const auto& [name, text] : out.tables) write(name, text);
}

}  // namespace cqsm::cli

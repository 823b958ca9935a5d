// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities, the wall time and the time budget. A criterion whose checks
// pass but whose wall time exceeds the budget is reported as FAIL.
//
// Usage: cqsm_acceptance [criterion ids...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cqsm/bounds.hpp"
#include "cqsm/clifford.hpp"
#include "cqsm/field.hpp"
#include "cqsm/hamiltonian.hpp"
#include "cqsm/sectors.hpp"
#include "cqsm/spectra.hpp"

using namespace cqsm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Accumulates named checks into one outcome.
class Report {
 public:
  void check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    parts_.push_back(what + (ok ? "" : " [x]"));
  }
  void note(const std::string& what) { parts_.push_back(what); }
  Outcome done() const {
    std::string s;
    for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "; " : "") + parts_[i];
    return {pass_, s};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> parts_;
};

MassField hedgehog(Profile p = Profile::exp_i(), double mass = 1.0) {
  return MassField{std::move(p), pauli_triple(), IsoField::polar(1), mass};
}

// Smooth off-centre Gaussian with a seeded internal vector; the same state
// the command-line tool uses for residual checks.
StateVector probe_state(const GridSpec& g, int dim, unsigned long seed) {
  const StateVector r = StateVector::random(GridSpec{1.0, 5}, dim, seed);
  CVec internal(dim);
  for (int c = 0; c < dim; ++c) internal[c] = r(0, c);
  internal.normalize();
  const double w = std::max(0.6, 0.1 * g.half_width);
  return StateVector::gaussian(g, dim, Vec3(0.25 * g.half_width, 0.125 * g.half_width, 0.0), w,
                               internal);
}

Vec3 random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 2.0);
  return Vec3(g(rng), g(rng), g(rng));
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// 1 -------------------------------------------------------------------------
Outcome algebra_suite() {
  const double tol = 1e-12;
  const auto alg = weyl_matrices();
  const CMat id4 = CMat::Identity(4, 4);
  double cliff = 0.0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k)
      cliff = std::max(cliff, max_abs(CMat(alg.alpha[j] * alg.alpha[k] + alg.alpha[k] * alg.alpha[j] -
                                            (j == k ? 2.0 : 0.0) * id4)));
    cliff = std::max(cliff, max_abs(CMat(alg.alpha[j] * alg.beta + alg.beta * alg.alpha[j])));
  }
  cliff = std::max(cliff, max_abs(CMat(alg.beta * alg.beta - id4)));
  Mat4c g5 = Mat4c::Zero();
  g5.diagonal() << 1, 1, -1, -1;
  const double g5_err = max_abs(Mat4c(alg.gamma5 - g5));

  const auto triple = pauli_triple();
  double triple_err = 0.0;
  for (const auto& v : verify_triple(triple, 0.0)) triple_err = std::max(triple_err, v.residual);

  double grading = 0.0;
  for (double c : {1.0, 2.0}) {
    const CMat g = grading_matrix(alg, make_xi(c, triple));
    grading = std::max(grading, max_abs(CMat(g * g - CMat::Identity(8, 8))));
    grading = std::max(grading, max_abs(CMat(g - g.adjoint())));
  }

  const auto mf = hedgehog();
  std::mt19937_64 rng(2026);
  double unit = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 x = random_point(rng);
    const CMat u = eval_UF(mf, alg, x), phi = eval_PhiF(mf, x);
    unit = std::max(unit, max_abs(CMat(u * u.adjoint() - CMat::Identity(8, 8))));
    unit = std::max(unit, max_abs(CMat(phi * phi.adjoint() - CMat::Identity(4, 4))));
  }
  Report r;
  r.check(cliff <= tol, "Clifford " + fmt(cliff));
  r.check(g5_err <= tol, "gamma5 " + fmt(g5_err));
  r.check(triple_err <= tol, "triple " + fmt(triple_err));
  r.check(grading <= tol, "Gamma^2, Gamma^* " + fmt(grading));
  r.check(unit <= tol, "U_F, Phi_F unitarity (1e4 points) " + fmt(unit));
  return r.done();
}

// 2 -------------------------------------------------------------------------
Outcome chiral_identity() {
  const GridSpec g{8.0, 15};
  const auto alg = weyl_matrices();
  const auto mf = hedgehog();
  const auto h = assemble_H(g, mf, alg);
  double worst = 0.0;
  for (unsigned long s = 1; s <= 3; ++s)
    worst = std::max(worst, chiral_commutator_residual(h, mf, alg, StateVector::random(g, 8, s)));
  Report r;
  r.check(worst <= 1e-10, "max residual over 3 random states " + fmt(worst));
  return r.done();
}

// 3 -------------------------------------------------------------------------
Outcome susy_suite() {
  // M = 2 and R = 1.1 put bound levels in the gap at n = 21; with the
  // default R = 0.55 and M = 1 the gap is empty and the pairing is vacuous.
  const GridSpec g{8.0, 21};
  const auto alg = weyl_matrices();
  Report r;
  for (double c : {1.0, 2.0}) {
    const MassField mf{Profile::exp_i(1.1), pauli_triple(), IsoField::susy_example(c), 2.0};
    const auto xi = make_xi(c, mf.triple);
    const auto h = assemble_H(g, mf, alg);
    const auto gamma = assemble_Gamma(g, alg, xi);
    double anti = 0.0;
    for (unsigned long s = 1; s <= 3; ++s)
      anti = std::max(anti, susy_residual(h, gamma, StateVector::random(g, 8, s)));
    GapSolveOptions opt;
    const auto res = gap_eigenvalues(h, opt);
    const auto pairing = check_pair_symmetry(res.eigenvalues, 1e-7);
    double partner = 0.0;
    for (double v : grading_partner_residuals(h, gamma, res)) partner = std::max(partner, v);
    const std::string tag = "C=" + fmt(c) + ": ";
    r.check(in_susy_family(g, mf, xi), tag + "constant-xi family");
    r.check(anti <= 1e-10, tag + "{Gamma,H} " + fmt(anti));
    r.check(res.info.converged && !res.info.truncated && !res.eigenvalues.empty(),
            tag + "N_H " + std::to_string(res.eigenvalues.size()));
    r.check(pairing.matched && pairing.multiplicities_agree,
            tag + "pair mismatch " + fmt(pairing.max_mismatch));
    r.check(partner <= 10.0 * opt.tol, tag + "partner residual " + fmt(partner));
  }
  return r.done();
}

// 4 -------------------------------------------------------------------------
Outcome free_field() {
  const GridSpec g{8.0, 15};
  const auto alg = weyl_matrices();
  const auto h = assemble_H(g, hedgehog(Profile::vanishing(), 1.0), alg);
  const auto res = gap_eigenvalues(h);
  // every mode from two random-phase probes, then the exact per-mode
  // projection on a 5^3 subset
  double worst = 0.0, phase_leak = 0.0, leak = 0.0;
  for (const auto& ms : all_mode_symbols(h, 7)) {
    const Eigen::SelfAdjointEigenSolver<CMat> es(ms.symbol, Eigen::EigenvaluesOnly);
    const double e = std::sqrt(ms.k.squaredNorm() + 1.0);
    // four levels at -e, four at +e
    for (Eigen::Index i = 0; i < 8; ++i)
      worst = std::max(worst, std::abs(es.eigenvalues()[i] - (i < 4 ? -e : e)));
    worst = std::max(worst, max_abs(CMat(ms.symbol - ms.symbol.adjoint())));
    phase_leak = std::max(phase_leak, ms.leakage);
  }
  for (int mx : {0, 3, 7, 11, 14})
    for (int my : {0, 3, 7, 11, 14})
      for (int mz : {0, 3, 7, 11, 14}) leak = std::max(leak, mode_symbol(h, mx, my, mz).leakage);
  Report r;
  r.check(res.info.converged && res.eigenvalues.empty(),
          "gap levels " + std::to_string(res.eigenvalues.size()));
  r.check(worst <= 1e-12, "dispersion error over all 15^3 modes " + fmt(worst));
  r.check(phase_leak <= 1e-12, "mode coupling " + fmt(phase_leak));
  r.check(leak <= 1e-12, "leakage on 125 modes " + fmt(leak));
  return r.done();
}

// 5 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
  const auto alg = weyl_matrices();
  const std::vector<std::pair<std::string, Profile>> profiles = {
      {"ExpI", Profile::exp_i()}, {"MixedII", Profile::mixed_ii()},
      {"RationalIII", Profile::rational_iii()}};
  Report r;
  for (int n : {7, 9})
    for (const auto& [name, p] : profiles) {
      const auto h = assemble_H(GridSpec{3.0, n}, hedgehog(p, 2.0), alg);
      GapSolveOptions dense, iter;
      dense.method = SolveMethod::Dense;
      iter.method = SolveMethod::Iterative;
      iter.tol = 1e-10;
      dense.keep_vectors = iter.keep_vectors = false;
      const auto rd = gap_eigenvalues(h, dense);
      const auto ri = gap_eigenvalues(h, iter);
      const double d = max_diff(rd.eigenvalues, ri.eigenvalues);
      r.check(d <= 1e-8 && ri.info.converged && !rd.eigenvalues.empty(),
              name + " n=" + std::to_string(n) + " N=" + std::to_string(rd.eigenvalues.size()) +
                  " diff " + fmt(d));
    }
  return r.done();
}

// 6 -------------------------------------------------------------------------
Outcome h_squared() {
  // L = 4 keeps n = 15 .. 31 in the asymptotic regime for the R = 0.55
  // soliton; at L = 8 the same pair of grids gives a ratio near 3.
  const auto alg = weyl_matrices();
  const auto mf = hedgehog();
  double res[2];
  int idx = 0;
  for (int n : {15, 31}) {
    const GridSpec g{4.0, n};
    res[idx++] = h_squared_residual(assemble_H(g, mf, alg), mf, alg, probe_state(g, 8, 1234));
  }
  Report r;
  r.note("n=15 " + fmt(res[0]) + ", n=31 " + fmt(res[1]));
  r.check(res[0] / res[1] >= 10.0, "ratio " + fmt(res[0] / res[1]));
  return r.done();
}

// 7 -------------------------------------------------------------------------
Outcome bound_chain() {
  ChainOptions opt;
  opt.mc_samples = 10000000;
  opt.mc_seed = 2024;
  const auto rep = bound_chain_report(hedgehog(), GridSpec{8.0, 31}, opt);
  const double radial = rep.c_f.c_f, mc = rep.c_f_mc.c_f, sigma = rep.c_f_mc.quadrature_error_estimate;
  Report r;
  r.check(rep.complete && rep.stable, "counts complete and stable");
  r.check(rep.n_h <= rep.n_l && rep.n_l <= rep.n_l0 && rep.n_l0 <= rep.bound && rep.holds,
          "N_H " + std::to_string(rep.n_h) + " <= N(L) " + std::to_string(rep.n_l) +
              " <= N(L0) " + std::to_string(rep.n_l0) + " <= " + fmt(rep.bound));
  r.check(rep.have_mc && std::abs(radial - mc) <= 3.0 * sigma,
          "C_F radial " + fmt(radial) + " vs MC " + fmt(mc) + " +- " + fmt(sigma));
  r.check(std::abs(radial - mc) <= 0.01 * radial,
          "relative " + fmt(std::abs(radial - mc) / radial));
  return r.done();
}

// 8 -------------------------------------------------------------------------
Outcome no_eigenvalue() {
  const double amplitude = 0.1;
  const auto mf = hedgehog(Profile::amplitude_scaled(Profile::exp_i(), amplitude));
  const auto b = cf_radial(mf, 30.0 * mf.profile.scale(), 24);
  const auto res = gap_eigenvalues(assemble_H(GridSpec{8.0, 31}, mf, weyl_matrices()));
  Report r;
  r.check(b.n_h_bound < 1.0, "amplitude " + fmt(amplitude) + " bound " + fmt(b.n_h_bound));
  r.check(res.info.converged && !res.info.truncated && res.eigenvalues.empty(),
          "N_H " + std::to_string(res.eigenvalues.size()));
  return r.done();
}

// 9 -------------------------------------------------------------------------
Outcome eps_scan() {
  const std::vector<double> eps = {1.0, 0.5, 0.25, 0.125, 0.0625};
  const auto scan = scan_epsilon(GridSpec{8.0, 31}, hedgehog(), weyl_matrices(), eps);
  Report r;
  std::string trail;
  bool found = false;
  auto has_level = [](const EpsScanEntry& e) { return e.error.empty() && e.n_h >= 1; };
  for (std::size_t i = 0; i < scan.size(); ++i) {
    trail += (i ? ", " : "") + fmt(scan[i].eps) + ":" + std::to_string(scan[i].n_h) +
             (scan[i].truncated ? "+" : "") + (scan[i].error.empty() ? "" : "!");
    if (i + 1 < scan.size() && has_level(scan[i]) && has_level(scan[i + 1])) found = true;
  }
  r.note("eps:N_H " + trail + " (+ marks a lower bound)");
  r.check(found, "N_H >= 1 at two consecutive eps");
  return r.done();
}

// 10 ------------------------------------------------------------------------
Outcome sector_suite() {
  const auto alg = weyl_matrices();
  const auto mf = hedgehog();
  Report r;
  {
    const GridSpec g{8.0, 21};
    const auto k3 = assemble_K3(g, alg, mf.triple, 1);
    double sa = 0.0;
    for (unsigned long s = 1; s <= 3; ++s)
      sa = std::max(sa, self_adjointness_residual(k3, StateVector::random(g, 8, s),
                                                  StateVector::random(g, 8, s + 10)));
    r.check(sa <= 1e-10, "K3 self-adjointness " + fmt(sa));
  }
  {
    double c[2];
    int idx = 0;
    for (int n : {21, 41}) {
      const GridSpec g{8.0, n};
      c[idx++] = k3_commutator_residual(assemble_H(g, mf, alg), assemble_K3(g, alg, mf.triple, 1),
                                        probe_state(g, 8, 1234));
    }
    r.check(c[0] / c[1] >= 4.0, "[H,K3] n=21 " + fmt(c[0]) + " n=41 " + fmt(c[1]) + " ratio " +
                                    fmt(c[0] / c[1]));
  }
  {
    // L = 10 keeps the periodic seam, which breaks the rotation by about
    // M |sin F(L)|, below the tolerance.
    const auto rep = sector_equivalence_check(GridSpec{10.0, 7}, mf, alg, 1, 1e-6);
    r.check(rep.passed && rep.off_block_residual <= 1e-6,
            "sector check n=7 off-block " + fmt(rep.off_block_residual) + " mismatch " +
                fmt(rep.spectrum_mismatch));
  }
  {
    const GridSpec g{8.0, 31};
    const double eps = 0.5;
    auto res = gap_eigenvalues(assemble_H_eps(g, mf, alg, eps));
    const auto labels =
        classify_by_k3(res, assemble_K3(g, alg, mf.triple, 1), alg, mf.triple, 1, 1e-4);
    double worst = 0.0;
    int classified = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (res.residual_norms[i] > 10.0 * 1e-8) continue;
      worst = std::max(worst, labels[i].k3_variance);
      ++classified;
    }
    r.check(res.info.converged && classified > 0 && worst <= 1e-4,
            "K3 variance n=31 eps=0.5 over " + std::to_string(classified) + " vectors, max " +
                fmt(worst));
  }
  {
    const auto gfun = axial_from_radial(Profile::exp_i());
    const CylGrid cg{8.0, 8.0, 80, 160};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Eigen::VectorXd f(cg.size()), h(cg.size());
    for (auto& x : f) x = nd(rng);
    for (auto& x : h) x = nd(rng);
    double sym = 0.0;
    for (int l : {0, 1, 2})
      for (int s : {1, -1})
        sym = std::max(sym, weighted_symmetry_residual(assemble_Ls(gfun, l, s, 1.0, cg), f, h));
    r.check(sym <= 1e-12, "L_s symmetry " + fmt(sym));
    const CylGrid small{6.0, 6.0, 16, 32};
    bool same = true;
    for (int l : {1, 2, 3})
      same = same && sector_levels_dense(assemble_Ls(gfun, l, 1, 1.0, small), 8) ==
                         sector_levels_dense(assemble_Ls(gfun, -l, 1, 1.0, small), 8);
    r.check(same, "l <-> -l spectra identical");
  }
  return r.done();
}

// 11 ------------------------------------------------------------------------
Outcome unitary_equivalence() {
  const auto alg = weyl_matrices();
  const MassField mf{Profile::exp_i(), pauli_triple(), IsoField::constant(Vec3::UnitZ()), 1.0};
  Report r;
  {
    const GridSpec g{8.0, 9};
    const auto h = assemble_H(g, mf, alg), hb = assemble_HB(g, mf, alg);
    const auto vals = dense_eigenvalues(to_dense(h));
    const double d = max_diff(vals, dense_eigenvalues(to_dense(hb)));
    r.check(d <= 1e-8, "dense spectra H vs H(B) n=9 max diff " + fmt(d));
    // X_F is block diagonal over nodes, so the conjugation is cheap in sparse form.
    const Eigen::SparseMatrix<cd> xs = to_dense(assemble_XF(g, mf, alg)).sparseView();
    CMat a = to_dense(h);
    a = (xs * a).eval();
    a = (a * xs.adjoint()).eval();
    r.note("H vs X_F H X_F^* " + fmt(max_diff(vals, dense_eigenvalues(a))));
  }
  double c[2];
  int idx = 0;
  for (int n : {21, 41}) {
    const GridSpec g{8.0, n};
    c[idx++] = xf_conjugation_residual(assemble_H(g, mf, alg), assemble_HB(g, mf, alg),
                                       assemble_XF(g, mf, alg), probe_state(g, 8, 1234));
  }
  r.check(c[0] / c[1] >= 4.0, "X_F H X_F^* - H(B) n=21 " + fmt(c[0]) + " n=41 " + fmt(c[1]) +
                                  " ratio " + fmt(c[0] / c[1]));
  return r.done();
}

// 12 ------------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("cqsm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  struct Case {
    std::string command, config;
  };
  const std::vector<Case> cases = {
      {"bound", R"({"bound": {"method": "both", "mc_samples": 200000}})"},
      {"solve", R"({"grid": {"n": 7, "half_width": 3.0}, "field": {"mass": 2.0}})"},
  };
  Report r;
  for (const auto& c : cases) {
    const fs::path cfg = dir / (c.command + ".json");
    std::ofstream(cfg) << c.config;
    std::vector<std::string> payloads;
    for (int run = 0; run < 3; ++run) {
      const fs::path out = dir / (c.command + std::to_string(run));
      const std::string cmd = std::string("\"") + CQSM_EXE + "\" " + c.command + " --config \"" +
                              cfg.string() + "\" --out \"" + out.string() +
                              "\" --seed 77 --quiet --threads " + (run == 2 ? "2" : "1");
      const int rc = std::system(cmd.c_str());
      r.check(rc == 0, c.command + " run " + std::to_string(run) + " exit " + std::to_string(rc));
      payloads.push_back(slurp(out / "result.json"));
    }
    const bool same = !payloads[0].empty() && payloads[0] == payloads[1] && payloads[0] == payloads[2];
    r.check(same, c.command + " result.json byte-identical (2 runs + 2 threads, " +
                      std::to_string(payloads[0].size()) + " bytes)");
  }
  fs::remove_all(dir);
  return r.done();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "algebra suite", 5, algebra_suite},
      {2, "chiral symmetry breaking identity", 10, chiral_identity},
      {3, "supersymmetric pairing", 300, susy_suite},
      {4, "free field", 30, free_field},
      {5, "dense vs iterative oracle", 180, oracle_equivalence},
      {6, "H^2 identity convergence", 120, h_squared},
      {7, "bound chain", 900, bound_chain},
      {8, "weak-field no-eigenvalue", 300, no_eigenvalue},
      {9, "eps-scan ground-state emergence", 1200, eps_scan},
      {10, "K3 sector suite", 1200, sector_suite},
      {11, "unitary equivalence H ~ H(B)", 600, unitary_equivalence},
      {12, "determinism", 60, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failed += !pass;
    std::printf("%s  %2d  %s: %s | %.1f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}

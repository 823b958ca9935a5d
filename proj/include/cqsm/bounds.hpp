// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "cqsm/field.hpp"
#include "cqsm/grid.hpp"
#include "cqsm/spectra.hpp"

namespace cqsm {

enum class BoundMethod { RadialLogKernel, MonteCarlo };

std::string to_string(BoundMethod m);

/// C_F = int int V_F(x) V_F(y) / |x - y|^2 dx dy and the resulting count
/// bound dim K * M^2 * C_F / (4 pi^2).
struct BoundReport {
  double c_f = 0.0;
  double n_h_bound = 0.0;
  /// Radial: |I(n) - I(2n)|. Monte Carlo: one standard error.
  double quadrature_error_estimate = 0.0;
  /// Radial only: rigorous bound on the part of C_F outside the cutoff.
  double tail_bound = 0.0;
  BoundMethod method = BoundMethod::RadialLogKernel;
  long samples = 0;
  unsigned long seed = 0;
  double r_max = 0.0;
  int n_quad = 0;
};

/// dim_k * M^2 * c_f / (4 pi^2).
double nh_bound(double c_f, double mass, int dim_k);

/// Angular-integrated form for radial V:
///   C = 8 pi^2 int_0^R int_0^R a b V(a) V(b) ln((a + b) / |a - b|) da db.
/// Gauss-Legendre panels of width `panel` with the a = b diagonal split and
/// a graded substitution on the two panels touching it. The reported value
/// uses 2 n_quad nodes per panel; the error estimate is the change from
/// n_quad.
struct RadialIntegral {
  double value = 0.0;
  double error = 0.0;
  double tail_bound = 0.0;
};
RadialIntegral radial_log_kernel_integral(const std::function<double(double)>& v,
                                          double r_max, int n_quad, double panel);

/// C_F by the radial formula; needs a radial V_F (radial profile, polar
/// hedgehog with m = 1 or a constant field). r_max must be at least ten
/// profile scales.
BoundReport cf_radial(const MassField& mf, double r_max, int n_quad);

/// Monte Carlo estimate of the 6D integral for an arbitrary V. Points x are
/// drawn with density ~ exp(-|x| / rho); the separation z = y - x with
/// density ~ exp(-|z| / rho) / |z|^2, which absorbs the kernel singularity.
/// For V decaying like exp(-r / R) the weights are bounded when rho >= 2 R. Samples are split into fixed batches with
/// per-batch seeds and summed in batch order, so results are bit-identical
/// for a given seed regardless of `threads`.
struct MonteCarloIntegral {
  double value = 0.0;
  double std_error = 0.0;
};
MonteCarloIntegral monte_carlo_kernel_integral(const std::function<double(const Vec3&)>& v,
                                               double rho, long samples,
                                               unsigned long seed, int threads = 1);

/// C_F by Monte Carlo with rho = 2 profile scales. Reliable for exponentially
/// decaying profiles; for V_F ~ r^-3 (RationalIII) the estimator variance is
/// infinite.
BoundReport cf_monte_carlo(const MassField& mf, long samples, unsigned long seed,
                           int threads = 1);

enum class SchrodingerKind { SPlus, SMinus, L0 };

std::string to_string(SchrodingerKind k);

struct SchrodingerResult {
  SchrodingerKind kind = SchrodingerKind::SPlus;
  double ground = 0.0;
  /// L0 only: negative levels of the scalar operator below -eta, and the
  /// count on C^4 (x) K (4 dim K copies).
  int n_minus_scalar = 0;
  int n_minus = 0;
  double eta = 0.0;
  bool converged = true;
  bool truncated = false;
};

struct SchrodingerOptions {
  double tol = 1e-8;
  double edge_fraction = 0.02;
  int max_levels = 64;
  unsigned long seed = 4321;
};

/// Pointwise potential of S+-(F) = -Lap +- M D_3 cos F or L0(F) = -Lap - M V_F.
std::vector<double> schrodinger_potential(SchrodingerKind kind, const MassField& mf,
                                          const GridSpec& grid);

/// Ground energy of the scalar operator on the periodic grid. For L0 the
/// negative levels are counted below -eta, eta = M^2 - (M - delta_edge)^2,
/// matching the gap window used for N_H; the box continuum of the periodic
/// Laplacian sits just below zero and is excluded that way.
SchrodingerResult schrodinger_ground(SchrodingerKind kind, const MassField& mf,
                                     const GridSpec& grid,
                                     const SchrodingerOptions& opt = {});

struct ChainReport {
  int n_h = 0;
  int n_l = 0;   // levels of H^2 - M^2 below -eta
  int n_l0 = 0;  // levels of L0 below -eta on C^4 (x) K
  double bound = 0.0;
  BoundReport c_f;
  BoundReport c_f_mc;
  bool have_mc = false;
  bool holds = false;
  bool stable = true;  // counts unchanged under tol / 10
  bool complete = true;
  std::string note;
};

struct ChainOptions {
  GapSolveOptions gap;
  SchrodingerOptions schrodinger;
  double r_max = 0.0;  // 0: 30 profile scales
  int n_quad = 24;
  long mc_samples = 0;  // 0: no Monte Carlo cross-check
  unsigned long mc_seed = 2024;
  int threads = 1;
  bool stability_check = true;
};

/// N_H <= N(L(F)) <= N(L0(F)) <= dim K M^2 C_F / (4 pi^2).
ChainReport bound_chain_report(const MassField& mf, const GridSpec& grid,
                               const ChainOptions& opt = {});

}  // namespace cqsm

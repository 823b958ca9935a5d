// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqsm/hamiltonian.hpp"

namespace cqsm {

enum class SolveMethod { Auto, Iterative, Dense };

std::string to_string(SolveMethod m);

struct SolverInfo {
  std::string method;
  int iterations = 0;
  long matvecs = 0;
  double tolerance = 0.0;
  int block_size = 0;
  bool converged = true;
  /// More gap states than max_pairs; the eigenvalue list is incomplete.
  bool truncated = false;
};

/// Gap eigenpairs of a Dirac-type operator.
struct SpectrumResult {
  std::vector<double> eigenvalues;     // ascending
  std::vector<double> residual_norms;  // |H psi - lambda psi| / |psi|
  std::vector<StateVector> eigenvectors;
  /// lambda in (-M + delta_edge, M - delta_edge); always true for reported
  /// pairs, near-edge levels go to `edge_values`.
  std::vector<bool> gap_mask;
  /// Approximate levels in the excluded bands within delta_edge of +-M.
  std::vector<double> edge_values;
  double gap_mass = 0.0;
  double edge_delta = 0.0;
  /// Levels of H^2 below (M - delta_edge)^2 before signs are recovered.
  int folded_count = 0;
  SolverInfo info;
};

struct GapSolveOptions {
  double tol = 1e-8;
  int max_pairs = 64;
  double edge_fraction = 0.02;
  SolveMethod method = SolveMethod::Auto;
  /// Dense solves are used in Auto mode up to this many unknowns.
  std::size_t dense_limit = 6000;
  bool keep_vectors = true;
  int initial_block = 12;
  int max_iterations = 3000;
  unsigned long seed = 1234;
  /// Overrides the operator's gap mass when positive.
  double mass = 0.0;
  /// Caps the block so the solver's work space (about ten blocks) fits;
  /// hitting the cap with every Ritz value in the window marks the result
  /// truncated, and the reported count is then a lower bound.
  double memory_budget_mb = 2500.0;
};

/// Eigenpairs of H with |lambda| < M - delta_edge: smallest eigenvalues of H^2
/// by preconditioned block iteration, then Rayleigh-Ritz with H on the
/// converged subspace to recover signs. The block grows until a level above
/// the window is resolved. Dense diagonalization is used instead when
/// requested or when the dimension is small in Auto mode.
SpectrumResult gap_eigenvalues(const DiscreteOperator& h,
                               const GapSolveOptions& opt = {});

/// Dense Hermitian eigenvalues with optional window [lo, hi]; independent
/// blocks (connected components of the nonzero pattern) are diagonalized
/// separately. Vectors are returned in `vectors` when requested.
std::vector<double> dense_eigenvalues(const CMat& a, std::optional<double> lo = {},
                                      std::optional<double> hi = {},
                                      CMat* vectors = nullptr);

/// Number of independent blocks of a matrix's nonzero pattern.
int count_blocks(const CMat& a);

/// Number of gap eigenvalues; throws ValidationError when the result is
/// truncated and ConvergenceError when it did not converge.
int count_NH(const SpectrumResult& res);

struct PairingReport {
  bool matched = true;
  double max_mismatch = 0.0;
  bool multiplicities_agree = true;
  int positive = 0;
  int negative = 0;
  int near_zero = 0;
};

/// Greedy matching of every lambda with the closest unused -lambda'.
/// Multiplicities compare clusters within `cluster_tol` on either side.
PairingReport check_pair_symmetry(const std::vector<double>& eigenvalues,
                                  double tol, double cluster_tol = 1e-6);

struct GroundEnergies {
  double e0_plus = 0.0;
  double e0_minus = 0.0;
};

/// E0+ = smallest nonnegative gap level or +M; E0- = largest nonpositive
/// gap level or -M.
GroundEnergies ground_energies(const SpectrumResult& res);

struct EpsScanEntry {
  double eps = 1.0;
  int n_h = 0;
  GroundEnergies ground;
  bool converged = true;
  bool truncated = false;
  std::string error;
  SpectrumResult spectrum;
};

/// Gap counts and ground energies of H_eps along `eps_list` (in the given
/// order). Scanning stops once two consecutive entries have N >= 1.
std::vector<EpsScanEntry> scan_epsilon(const GridSpec& grid, const MassField& mf,
                                       const DiracAlgebra& alg,
                                       const std::vector<double>& eps_list,
                                       const GapSolveOptions& opt = {});

struct KernelProbe {
  int dim_kernel = 0;
  int gamma_plus = 0;
  int gamma_minus = 0;
  int index_estimate = 0;
};

/// Eigenvalues with |lambda| <= tol, split by the grading operator. Needs
/// eigenvectors in `res`.
KernelProbe kernel_probe(const SpectrumResult& res, const DiscreteOperator& gamma,
                         double tol);

/// |H Gamma psi + lambda Gamma psi| / |psi| for each gap pair.
std::vector<double> grading_partner_residuals(const DiscreteOperator& h,
                                              const DiscreteOperator& gamma,
                                              const SpectrumResult& res);

// ---------------------------------------------------------------------------
// Scalar Schroedinger operators -Lap + V(x) on the periodic grid.

struct ScalarSpectrum {
  std::vector<double> eigenvalues;  // ascending, all below `threshold`
  double ground = 0.0;
  double threshold = 0.0;
  int count_below = 0;
  bool converged = true;
  bool truncated = false;
  int iterations = 0;
};

struct ScalarSolveOptions {
  double tol = 1e-8;
  int max_levels = 64;
  int initial_block = 8;
  int max_iterations = 3000;
  unsigned long seed = 4321;
  double memory_budget_mb = 1000.0;
};

/// Lowest eigenvalues of -Lap + V, all those below `threshold` plus the
/// ground state.
ScalarSpectrum scalar_levels(const GridSpec& grid, const std::vector<double>& potential,
                             double threshold, const ScalarSolveOptions& opt = {});

}  // namespace cqsm

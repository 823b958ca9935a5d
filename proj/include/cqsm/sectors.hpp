// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "cqsm/hamiltonian.hpp"
#include "cqsm/spectra.hpp"

namespace cqsm {

/// Joint label of a K3 sector; k3_value = l + s/2 + m t/2.
struct SectorLabel {
  int l = 0;
  int s = 1;
  int t = 1;
  double k3_value = 0.0;
  double k3_mean = 0.0;
  double k3_variance = 0.0;
  bool mixed = false;
};

/// Half-offset grid on (0, r_max) x (-z_max, z_max):
/// r_i = (i + 1/2) dr, z_j = -z_max + (j + 1/2) dz, weight r_i dr dz.
struct CylGrid {
  double r_max = 8.0;
  double z_max = 8.0;
  int n_r = 80;
  int n_z = 160;

  double dr() const { return r_max / n_r; }
  double dz() const { return 2.0 * z_max / n_z; }
  double r(int i) const { return (i + 0.5) * dr(); }
  double z(int j) const { return -z_max + (j + 0.5) * dz(); }
  std::size_t size() const { return static_cast<std::size_t>(n_r) * n_z; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_z + j; }
  double weight(int i) const { return r(i) * dr() * dz(); }
  /// Same node count on a box dilated by `factor`.
  CylGrid scaled(double factor) const;
  void validate() const;
};

using AxialProfile = std::function<double(double r, double z)>;

/// G(r, z) = F(sqrt(r^2 + z^2)) for a radial profile.
AxialProfile axial_from_radial(const Profile& f);

enum class ZSign { Minus, Plus };

/// L_s(G, l) = -d_r^2 - (1/r) d_r + l^2 / r^2 -+ d_z^2 + s M D_z cos G on the
/// weighted grid with Dirichlet outer boundaries and flux form in r.
/// `z_sign` selects -d_z^2 (default) or the printed +d_z^2.
class SectorOperator {
 public:
  const CylGrid& grid() const { return grid_; }
  int l() const { return l_; }
  int s() const { return s_; }
  double mass() const { return mass_; }
  ZSign z_sign() const { return z_sign_; }
  /// Matrix acting on nodal values.
  const Eigen::SparseMatrix<double>& matrix() const { return a_; }
  /// W^(1/2) A W^(-1/2), symmetric.
  const Eigen::SparseMatrix<double>& symmetric() const { return b_; }
  const Eigen::VectorXd& weights() const { return w_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return a_ * f; }
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

 private:
  friend SectorOperator assemble_Ls(const AxialProfile&, int, int, double, const CylGrid&,
                                    ZSign);
  CylGrid grid_;
  int l_ = 0;
  int s_ = 1;
  double mass_ = 1.0;
  ZSign z_sign_ = ZSign::Minus;
  Eigen::SparseMatrix<double> a_, b_;
  Eigen::VectorXd w_;
};

SectorOperator assemble_Ls(const AxialProfile& g, int l, int s, double mass,
                           const CylGrid& grid, ZSign z_sign = ZSign::Minus);

/// |<f, L g>_w - <L f, g>_w| / (|f|_w |g|_w).
double weighted_symmetry_residual(const SectorOperator& op, const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& g);

struct SectorGround {
  double e0 = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Smallest eigenvalue of the weighted operator.
SectorGround sector_ground(const SectorOperator& op, double tol = 1e-10);

/// Lowest `count` eigenvalues (dense; small grids only).
std::vector<double> sector_levels_dense(const SectorOperator& op, int count);

/// Labels gap eigenvectors by K3: the K3 matrix is rediagonalized inside
/// clusters of eigenvalues closer than `cluster_tol`, then each vector gets
/// its mean, variance and nearest lattice value l + s/2 + m t/2, with s and t
/// from the signs of <Sigma_3> and <T_3>. Vectors with variance above `tol`
/// are flagged mixed. `res.eigenvectors` is updated in place by the cluster
/// rotation.
std::vector<SectorLabel> classify_by_k3(SpectrumResult& res, const DiscreteOperator& k3,
                                        const DiracAlgebra& alg,
                                        const IsoSpinTriple& triple, int m, double tol,
                                        double cluster_tol = 1e-6);

/// Quarter turn about the z axis, exp(-i (pi/2) K3), realized exactly on the
/// grid: a node permutation times the internal factor
/// exp(-i (pi/2) (Sigma_3 / 2 + m T_3 / 2)).
StateVector quarter_turn(const StateVector& psi, const DiracAlgebra& alg,
                         const IsoSpinTriple& triple, int m);

struct SectorBlock {
  double k3_class = 0.0;  // K3 modulo 4
  int dim = 0;
  std::vector<double> eigenvalues;
};

struct SectorEquivalenceReport {
  std::vector<SectorBlock> blocks;
  /// max |<b_c, H b_c'>| over basis vectors of different quarter-turn sectors.
  double off_block_residual = 0.0;
  /// max |lambda_full - lambda_union| after sorting.
  double spectrum_mismatch = 0.0;
  /// |[H, K3]|_F / |H|_F for the grid K3 (informational).
  double k3_commutator = 0.0;
  /// Number of dense eigenvectors whose K3 mean modulo 4 disagrees with the
  /// quarter-turn sector they belong to (informational).
  int k3_class_disagreements = 0;
  bool passed = false;
};

/// Dense check on a small grid (n <= 9) that H is reduced by the K3 sectors.
/// The sectors are the eigenspaces of the exact grid quarter turn
/// exp(-i (pi/2) K3), i.e. K3 modulo 4: H is block-diagonalized in a
/// symmetry-adapted basis, the off-block couplings are measured and the union
/// of block spectra is compared with the full spectrum.
SectorEquivalenceReport sector_equivalence_check(const GridSpec& grid, const MassField& mf,
                                                 const DiracAlgebra& alg, int m,
                                                 double tol);

struct SectorScanEntry {
  int l = 0;
  int s = 1;
  int t = 1;
  double eps = 1.0;
  double e0 = 0.0;
  bool converged = false;
  std::string error;
};

/// E0(L_s(G_eps, l)) with mass M / eps for each eps. The grid is dilated by
/// 1 / eps together with the profile, so the node count per soliton radius
/// is fixed; for eps = 1 this is assemble_Ls + sector_ground.
std::vector<SectorScanEntry> sector_epsilon_scan(const AxialProfile& g, int l, int s, int t,
                                                 double mass,
                                                 const std::vector<double>& eps_list,
                                                 const CylGrid& grid, double tol = 1e-10,
                                                 ZSign z_sign = ZSign::Minus);

}  // namespace cqsm

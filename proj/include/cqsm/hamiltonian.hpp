// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cqsm/clifford.hpp"
#include "cqsm/field.hpp"
#include "cqsm/grid.hpp"

namespace cqsm {

enum class OperatorKind { H, HEps, HB, K3, Gamma, XF };

std::string to_string(OperatorKind k);

/// Matrix-free operator on C^(4 dim K) valued grid functions:
///
///   A = kinetic * (-i alpha . grad (x) I) + angular * (L3 (x) I)
///       + P(x) (pointwise table) + C (uniform internal matrix).
///
/// L3 is symmetrized, -(i/2)[(x1 D2 - x2 D1) + (D2 x1 - D1 x2)], so it is
/// exactly Hermitian on the periodic grid.
class DiscreteOperator {
 public:
  OperatorKind kind() const { return kind_; }
  const GridSpec& grid() const { return grid_; }
  int internal_dim() const { return dim_; }
  std::size_t size() const { return grid_.num_nodes() * dim_; }

  /// Mass scale of the gap, M / eps for H_eps and M otherwise.
  double gap_mass() const { return gap_mass_; }
  double eps() const { return eps_; }
  /// False for H_eps built from a field that is not scale invariant.
  bool scale_invariant_field() const { return scale_invariant_; }
  bool hermitian() const { return kind_ != OperatorKind::XF; }

  void apply(const cd* in, cd* out) const;
  StateVector apply(const StateVector& psi) const;
  /// Adjoint application; supported for every kind.
  StateVector apply_adjoint(const StateVector& psi) const;

  /// Number of matvecs performed by this operator and its copies.
  long matvec_count() const { return counter_->load(); }

  double kinetic_scale() const { return kinetic_; }
  double angular_scale() const { return angular_; }
  const std::vector<cd>& pointwise() const { return pointwise_; }
  const CMat& uniform() const { return uniform_; }

  /// Pointwise matrix at a node (zero if there is no pointwise table).
  CMat pointwise_at(std::size_t node) const;

 private:
  friend class OperatorBuilder;
  void apply_impl(const cd* in, cd* out, bool adjoint) const;

  OperatorKind kind_ = OperatorKind::H;
  GridSpec grid_;
  int dim_ = 4;
  std::shared_ptr<const SpectralGrid> spectral_;
  std::array<Mat4c, 3> alpha_;
  double kinetic_ = 0.0;
  double angular_ = 0.0;
  std::vector<cd> pointwise_;  // per node, column-major dim x dim
  // (row, col) offsets that are nonzero at some node; empty means dense
  std::vector<std::pair<int, int>> pattern_;
  CMat uniform_;
  double gap_mass_ = 0.0;
  double eps_ = 1.0;
  bool scale_invariant_ = true;
  std::shared_ptr<std::atomic<long>> counter_ = std::make_shared<std::atomic<long>>(0);
};

/// H = -i alpha . grad (x) I + M (beta (x) I) U_F.
DiscreteOperator assemble_H(const GridSpec& grid, const MassField& mf,
                            const DiracAlgebra& alg);

/// H_eps = -i alpha . grad + (M / eps) (beta (x) I) U_{F_eps}, T unchanged.
DiscreteOperator assemble_H_eps(const GridSpec& grid, const MassField& mf,
                                const DiracAlgebra& alg, double eps);

/// H(B) = -i alpha . grad + M beta - sum_j Sigma_j (x) B_j with
/// B_j = (1/2) D_j F T for constant T.
DiscreteOperator assemble_HB(const GridSpec& grid, const MassField& mf,
                             const DiracAlgebra& alg);

/// K3 = L3 (x) I + (1/2) Sigma_3 (x) I + (m/2) I (x) T_3.
DiscreteOperator assemble_K3(const GridSpec& grid, const DiracAlgebra& alg,
                             const IsoSpinTriple& triple, int m);

/// Constant grading operator i gamma5 beta (x) xi.
DiscreteOperator assemble_Gamma(const GridSpec& grid, const DiracAlgebra& alg,
                                const XiOperator& xi);

/// Pointwise unitary X_F = P+ exp(i F T / 2) + P- exp(-i F T / 2).
DiscreteOperator assemble_XF(const GridSpec& grid, const MassField& mf,
                             const DiracAlgebra& alg);

StateVector apply_XF(const MassField& mf, const DiracAlgebra& alg,
                     const StateVector& psi);

/// |<phi, A psi> - <A phi, psi>| / (|phi| |psi|).
double self_adjointness_residual(const DiscreteOperator& op,
                                 const StateVector& phi,
                                 const StateVector& psi);

/// |[gamma5, H] psi - 2 M gamma5 beta U_F psi| / |psi|; U_F re-evaluated from
/// the field, independently of the operator's table.
double chiral_commutator_residual(const DiscreteOperator& h,
                                  const MassField& mf, const DiracAlgebra& alg,
                                  const StateVector& psi);

/// |{Gamma, H} psi| / |psi|.
double susy_residual(const DiscreteOperator& h, const DiscreteOperator& gamma,
                     const StateVector& psi);

/// True if the field belongs to the constant-xi family matching `xi`, i.e.
/// {xi, T(x)} = 0 at every grid node.
bool in_susy_family(const GridSpec& grid, const MassField& mf,
                    const XiOperator& xi, double tol = 1e-10);

/// |H(H psi) - [(-Lap + M^2) psi + i M (beta (x) I)(alpha . grad U_F) psi]|
/// / |psi|, with grad U_F taken by spectral differentiation of the sampled
/// U_F.
double h_squared_residual(const DiscreteOperator& h, const MassField& mf,
                          const DiracAlgebra& alg, const StateVector& psi);

/// |[H_eps, K3] psi| / |psi|.
double k3_commutator_residual(const DiscreteOperator& h_eps,
                              const DiscreteOperator& k3,
                              const StateVector& psi);

/// |X_F H X_F^* psi - H(B) psi| / |psi|.
double xf_conjugation_residual(const DiscreteOperator& h,
                               const DiscreteOperator& hb,
                               const DiscreteOperator& xf,
                               const StateVector& psi);

/// Dense matrix of the operator, column by column.
CMat to_dense(const DiscreteOperator& op);

/// Internal-space symbol of the operator on the plane wave with FFT bin
/// (mx, my, mz): S(c', c) = <e_k c', A e_k c> / <e_k, e_k>, plus the norm of
/// the part of A e_k c outside that plane wave (zero for translation-invariant
/// operators).
struct ModeSymbol {
  CMat symbol;
  double leakage = 0.0;
  Vec3 k;
};
ModeSymbol mode_symbol(const DiscreteOperator& op, int mx, int my, int mz);

/// Symbols of every represented mode from 2 dim applications: each internal
/// component is loaded with all plane waves at once, with seeded random
/// phases, and the output is read off mode by mode. This is repeated with a
/// second set of phases; `leakage` is then the largest disagreement between
/// the two extractions of a symbol, which vanishes for translation-invariant
/// operators and is of the size of any coupling between modes otherwise.
/// Entries are in FFT bin order, index (mx * n + my) * n + mz.
std::vector<ModeSymbol> all_mode_symbols(const DiscreteOperator& op, unsigned long seed = 1);

}  // namespace cqsm

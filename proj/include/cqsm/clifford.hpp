// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "cqsm/common.hpp"

namespace cqsm {

/// Dirac matrices in the Weyl representation.
///
/// alpha_j = diag(sigma_j, -sigma_j), beta = antidiag(I, I) and
/// gamma5 = -i alpha_1 alpha_2 alpha_3 = diag(1, 1, -1, -1).
struct DiracAlgebra {
  std::array<Mat4c, 3> alpha;
  Mat4c beta;
  Mat4c gamma5;

  /// Spin matrix Sigma_j = sigma_j (+) sigma_j.
  Mat4c spin(int j) const;
};

/// Bounded self-adjoint T_1, T_2, T_3 on a finite-dimensional iso-spin space
/// with T_j^2 = I and T_1 T_2 = i T_3 (cyclic).
struct IsoSpinTriple {
  int dim_k = 0;
  std::array<CMat, 3> t;
};

/// Constant grading factor xi = (C T_1 - T_2) / sqrt(1 + C^2).
struct XiOperator {
  double c = 0.0;
  CMat xi;
};

struct TripleViolation {
  std::string relation;
  double residual = 0.0;
};

std::array<Mat2c, 3> pauli_matrices();

DiracAlgebra weyl_matrices();

IsoSpinTriple pauli_triple();

/// T_j (x) I_d, acting on C^2 (x) C^d.
IsoSpinTriple tensor_with_identity(const IsoSpinTriple& t, int d);

/// Lists every triple relation that fails within `tol` (max-entry norm).
/// An empty result means the triple is valid.
std::vector<TripleViolation> verify_triple(const IsoSpinTriple& t, double tol);

/// Throws ValidationError naming the first failed relation.
void require_valid_triple(const IsoSpinTriple& t, double tol = 1e-12);

XiOperator make_xi(double c, const IsoSpinTriple& t);

/// Gamma = i gamma5 beta (x) xi on C^4 (x) K.
CMat grading_matrix(const DiracAlgebra& alg, const XiOperator& xi);

/// Kronecker product with the left factor outermost (spinor-major layout).
CMat kron(const CMat& a, const CMat& b);

}  // namespace cqsm

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/clifford.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cqsm {

std::array<Mat2c, 3> pauli_matrices() {
  std::array<Mat2c, 3> s;
  s[0] << 0, 1, 1, 0;
  s[1] << 0, -kI, kI, 0;
  s[2] << 1, 0, 0, -1;
  return s;
}

Mat4c DiracAlgebra::spin(int j) const {
  const auto s = pauli_matrices();
  Mat4c m = Mat4c::Zero();
  m.topLeftCorner<2, 2>() = s[j];
  m.bottomRightCorner<2, 2>() = s[j];
  return m;
}

DiracAlgebra weyl_matrices() {
  const auto s = pauli_matrices();
  DiracAlgebra alg;
  for (int j = 0; j < 3; ++j) {
    alg.alpha[j].setZero();
    alg.alpha[j].topLeftCorner<2, 2>() = s[j];
    alg.alpha[j].bottomRightCorner<2, 2>() = -s[j];
  }
  alg.beta.setZero();
  alg.beta.topRightCorner<2, 2>() = Mat2c::Identity();
  alg.beta.bottomLeftCorner<2, 2>() = Mat2c::Identity();
  // Derived from the product rather than hard-coded; tests pin it to
  // diag(1, 1, -1, -1).
  alg.gamma5 = -kI * alg.alpha[0] * alg.alpha[1] * alg.alpha[2];
  return alg;
}

IsoSpinTriple pauli_triple() {
  const auto s = pauli_matrices();
  IsoSpinTriple t;
  t.dim_k = 2;
  for (int j = 0; j < 3; ++j) t.t[j] = s[j];
  return t;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

IsoSpinTriple tensor_with_identity(const IsoSpinTriple& t, int d) {
  if (d < 1) throw ValidationError("tensor_with_identity: d must be >= 1");
  IsoSpinTriple out;
  out.dim_k = t.dim_k * d;
  for (int j = 0; j < 3; ++j) out.t[j] = kron(t.t[j], CMat::Identity(d, d));
  return out;
}

std::vector<TripleViolation> verify_triple(const IsoSpinTriple& t,
                                           double tol) {
  std::vector<TripleViolation> out;
  const int d = t.dim_k;
  auto check = [&](const std::string& name, const CMat& residual) {
    const double r = max_abs(residual);
    if (!(r <= tol)) out.push_back({name, r});
  };
  for (int j = 0; j < 3; ++j) {
    if (t.t[j].rows() != d || t.t[j].cols() != d) {
      out.push_back({"shape of T" + std::to_string(j + 1),
                     std::numeric_limits<double>::infinity()});
      return out;
    }
  }
  const CMat id = CMat::Identity(d, d);
  for (int j = 0; j < 3; ++j) {
    const std::string k = std::to_string(j + 1);
    check("T" + k + " Hermitian", t.t[j] - t.t[j].adjoint());
    check("T" + k + "^2=I", t.t[j] * t.t[j] - id);
  }
  check("T1T2=iT3", t.t[0] * t.t[1] - kI * t.t[2]);
  check("T2T3=iT1", t.t[1] * t.t[2] - kI * t.t[0]);
  check("T3T1=iT2", t.t[2] * t.t[0] - kI * t.t[1]);
  // Neither +I nor -I: both eigenvalues must occur.
  for (int j = 0; j < 3; ++j) {
    const double dist = std::min(max_abs(CMat(t.t[j] - id)),
                                 max_abs(CMat(t.t[j] + id)));
    if (dist <= tol)
      out.push_back({"sigma(T" + std::to_string(j + 1) + ")={+1,-1}", dist});
  }
  return out;
}

void require_valid_triple(const IsoSpinTriple& t, double tol) {
  const auto v = verify_triple(t, tol);
  if (!v.empty()) {
    std::ostringstream os;
    os << "invalid iso-spin triple: relation " << v.front().relation
       << " has residual " << v.front().residual;
    throw ValidationError(os.str());
  }
}

XiOperator make_xi(double c, const IsoSpinTriple& t) {
  if (c == 0.0 || !std::isfinite(c))
    throw ValidationError("xi: constant C must be finite and nonzero");
  const double norm = std::sqrt(1.0 + c * c);
  return {c, (c * t.t[0] - t.t[1]) / norm};
}

CMat grading_matrix(const DiracAlgebra& alg, const XiOperator& xi) {
  const CMat g = kI * alg.gamma5 * alg.beta;
  return kron(g, xi.xi);
}

}  // namespace cqsm

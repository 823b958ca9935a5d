// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqsm {

using cd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Mat4c = Eigen::Matrix4cd;
using Mat2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or argument violated a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A field was evaluated where it is undefined (the hedgehog at the origin).
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// Tabulated data was queried outside its domain.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// The configuration does not satisfy a structural hypothesis an operation
/// depends on (e.g. a non-scalar sum of squared iso-spin derivatives).
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for this kind of configuration.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Operand shapes disagree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Max-entry norm, the norm used for all algebraic identity checks.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace cqsm

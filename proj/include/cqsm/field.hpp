// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cqsm/clifford.hpp"
#include "cqsm/common.hpp"

namespace cqsm {

enum class ProfileKind { ExpI, MixedII, RationalIII, CustomRadial, AmplitudeScaled };

std::string to_string(ProfileKind k);

/// Radial profile function F(|x|).
///
/// Lengths are in grid units; `length_unit` is the number of grid units per
/// femtometre, and the builtin parameters are quoted in femtometres. A
/// dilation factor implements F_eps(x) = F(eps x).
class Profile {
 public:
  /// F(r) = -pi exp(-r / R).
  static Profile exp_i(double radius = 0.55);
  /// F(r) = -pi (a1 exp(-r / R1) + a2 exp(-r^2 / R2^2)).
  static Profile mixed_ii(double a1 = 0.65, double r1 = 0.58, double a2 = 0.35,
                          double r2 = 0.5477225575051661);
  /// F(r) = -pi (1 - r / sqrt(lambda^2 + r^2)).
  static Profile rational_iii(double lambda = 0.6324555320336759);
  /// Linear interpolation of (radius, value) samples; constant beyond the
  /// last sample, OutOfRangeError below the first.
  static Profile custom_radial(std::vector<double> radii,
                               std::vector<double> values);
  /// Two-column CSV (radius, value); an optional non-numeric header line.
  static Profile load_csv(const std::string& path);
  /// F -> amplitude * F.
  static Profile amplitude_scaled(const Profile& base, double amplitude);
  /// F identically zero (amplitude-scaled ExpI with amplitude 0).
  static Profile vanishing();

  ProfileKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  double amplitude() const;
  double length_unit() const { return length_unit_; }
  double dilation() const { return dilation_; }

  Profile with_length_unit(double units_per_fm) const;
  /// F_eps(r) = F(eps r).
  Profile dilated(double eps) const;

  double value(double r) const;
  /// dF/dr.
  double derivative(double r) const;
  /// Characteristic decay length in grid units.
  double scale() const;
  bool is_zero() const;

  const Profile* base() const { return base_.get(); }
  const std::vector<double>& table_radii() const { return radii_; }
  const std::vector<double>& table_values() const { return values_; }

 private:
  double raw_value(double s) const;
  double raw_derivative(double s) const;

  ProfileKind kind_ = ProfileKind::ExpI;
  std::vector<double> params_;
  std::vector<double> radii_, values_;
  std::shared_ptr<const Profile> base_;
  double length_unit_ = 1.0;
  double dilation_ = 1.0;
};

double eval_profile(const Profile& p, double radius);

/// Gradient of the radial profile; SingularPointError at x = 0.
Vec3 grad_profile(const Profile& p, const Vec3& x);

enum class IsoFieldKind { Polar, Constant, SusyExample, Custom };

/// Unit iso-vector field n(x).
///
/// Polar/Custom fields are hedgehogs
/// n = (sin Theta cos m theta, sin Theta sin m theta, cos Theta) with
/// Theta = Theta(r, z) in cylindrical coordinates. SusyExample is the
/// constant-xi family n = (sin F, C sin F, sqrt(1 + C^2) cos F) / sqrt(1 + C^2)
/// built from the profile, which anticommutes with xi(C) everywhere.
class IsoField {
 public:
  using ThetaFn = std::function<double(double r, double z)>;

  static IsoField polar(int m = 1);
  static IsoField constant(const Vec3& direction);
  static IsoField susy_example(double c);
  static IsoField custom(ThetaFn theta, int m, bool scale_invariant,
                         std::string name = "custom");
  /// Theta = arccos(tanh(z / width)); not invariant under dilations.
  static IsoField z_tanh(double width, int m = 1);

  IsoFieldKind kind() const { return kind_; }
  int winding() const { return m_; }
  bool scale_invariant() const { return scale_invariant_; }
  double susy_c() const { return c_; }
  const Vec3& const_direction() const { return dir_; }
  const std::string& name() const { return name_; }
  double width() const { return width_; }
  bool is_constant() const { return kind_ == IsoFieldKind::Constant; }

  /// n(x); the profile is only consulted by SusyExample.
  Vec3 direction(const Vec3& x, const Profile& f) const;
  /// Columns are d n / d x_j.
  Eigen::Matrix3d jacobian(const Vec3& x, const Profile& f) const;

 private:
  IsoFieldKind kind_ = IsoFieldKind::Polar;
  int m_ = 1;
  bool scale_invariant_ = true;
  double c_ = 0.0;
  double width_ = 0.0;
  Vec3 dir_ = Vec3::UnitZ();
  ThetaFn theta_;
  std::string name_ = "polar";
};

/// Mass term data: profile, iso-spin triple, iso-vector field, and M > 0.
struct MassField {
  Profile profile;
  IsoSpinTriple triple;
  IsoField iso;
  double mass = 1.0;

  int dim_k() const { return triple.dim_k; }
  /// Same field with F replaced by F_eps (T unchanged).
  MassField dilated(double eps) const;
  void validate() const;
};

/// T(x) = n(x) . T.
CMat eval_T(const MassField& mf, const Vec3& x);

/// U_F = cos F (I4 (x) I) + i sin F (gamma5 (x) T).
CMat eval_UF(const MassField& mf, const DiracAlgebra& alg, const Vec3& x);

/// Phi_F = cos F (I2 (x) I) + i sin F (I2 (x) T).
CMat eval_PhiF(const MassField& mf, const Vec3& x);

/// sum_j (D_j T(x))^2 as a matrix on K.
CMat sum_dT_squared(const MassField& mf, const Vec3& x);

/// V_F = sqrt(|grad F|^2 + sum_j (D_j T)^2 sin^2 F). Throws
/// HypothesisViolation if sum_j (D_j T)^2 is not scalar within 1e-10.
double eval_VF(const MassField& mf, const Vec3& x);

/// Radial form of V_F for radial profiles with a constant field or the m = 1
/// polar hedgehog; UnsupportedConfiguration otherwise.
double radial_VF(const MassField& mf, double r);
bool has_radial_VF(const MassField& mf);

}  // namespace cqsm

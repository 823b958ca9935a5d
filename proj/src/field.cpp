// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cqsm {

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::ExpI: return "exp_i";
    case ProfileKind::MixedII: return "mixed_ii";
    case ProfileKind::RationalIII: return "rational_iii";
    case ProfileKind::CustomRadial: return "custom_radial";
    case ProfileKind::AmplitudeScaled: return "amplitude_scaled";
  }
  return "unknown";
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(what) + " must be finite and > 0");
}

}  // namespace

Profile Profile::exp_i(double radius) {
  require_positive(radius, "ExpI radius R");
  Profile p;
  p.kind_ = ProfileKind::ExpI;
  p.params_ = {radius};
  return p;
}

Profile Profile::mixed_ii(double a1, double r1, double a2, double r2) {
  require_positive(r1, "MixedII R1");
  require_positive(r2, "MixedII R2");
  if (!std::isfinite(a1) || !std::isfinite(a2))
    throw ValidationError("MixedII weights must be finite");
  Profile p;
  p.kind_ = ProfileKind::MixedII;
  p.params_ = {a1, r1, a2, r2};
  return p;
}

Profile Profile::rational_iii(double lambda) {
  require_positive(lambda, "RationalIII lambda");
  Profile p;
  p.kind_ = ProfileKind::RationalIII;
  p.params_ = {lambda};
  return p;
}

Profile Profile::custom_radial(std::vector<double> radii,
                               std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw ValidationError(
        "CustomRadial needs at least two (radius, value) samples");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || !std::isfinite(values[i]))
      throw ValidationError("CustomRadial samples must be finite");
    if (radii[i] < 0.0)
      throw ValidationError("CustomRadial radii must be nonnegative");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw ValidationError("CustomRadial radii must be strictly increasing");
  }
  Profile p;
  p.kind_ = ProfileKind::CustomRadial;
  p.radii_ = std::move(radii);
  p.values_ = std::move(values);
  return p;
}

Profile Profile::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile CSV: " + path);
  std::vector<double> r, f;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0, b = 0;
    if (!(ls >> a >> b)) {
      if (r.empty() && lineno == 1) continue;  // header
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected two numeric columns");
    }
    r.push_back(a);
    f.push_back(b);
  }
  return custom_radial(std::move(r), std::move(f));
}

Profile Profile::amplitude_scaled(const Profile& base, double amplitude) {
  if (!std::isfinite(amplitude))
    throw ValidationError("profile amplitude must be finite");
  Profile p;
  p.kind_ = ProfileKind::AmplitudeScaled;
  p.params_ = {amplitude};
  p.base_ = std::make_shared<const Profile>(base);
  return p;
}

Profile Profile::vanishing() { return amplitude_scaled(exp_i(), 0.0); }

double Profile::amplitude() const {
  if (kind_ == ProfileKind::AmplitudeScaled)
    return params_[0] * base_->amplitude();
  return 1.0;
}

Profile Profile::with_length_unit(double units_per_fm) const {
  require_positive(units_per_fm, "length_unit");
  Profile p = *this;
  p.length_unit_ = units_per_fm;
  return p;
}

Profile Profile::dilated(double eps) const {
  require_positive(eps, "dilation eps");
  Profile p = *this;
  p.dilation_ *= eps;
  return p;
}

double Profile::raw_value(double s) const {
  switch (kind_) {
    case ProfileKind::ExpI:
      return -kPi * std::exp(-s / params_[0]);
    case ProfileKind::MixedII: {
      const double a1 = params_[0], r1 = params_[1], a2 = params_[2],
                   r2 = params_[3];
      return -kPi * (a1 * std::exp(-s / r1) + a2 * std::exp(-s * s / (r2 * r2)));
    }
    case ProfileKind::RationalIII: {
      const double l = params_[0];
      return -kPi * (1.0 - s / std::sqrt(l * l + s * s));
    }
    case ProfileKind::CustomRadial: {
      if (s < radii_.front()) {
        std::ostringstream os;
        os << "CustomRadial: radius " << s << " below first sample "
           << radii_.front();
        throw OutOfRangeError(os.str());
      }
      if (s >= radii_.back()) return values_.back();
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      const double t = (s - radii_[i]) / (radii_[i + 1] - radii_[i]);
      return (1.0 - t) * values_[i] + t * values_[i + 1];
    }
    case ProfileKind::AmplitudeScaled:
      return params_[0] == 0.0 ? 0.0 : params_[0] * base_->value(s);
  }
  return 0.0;
}

double Profile::raw_derivative(double s) const {
  switch (kind_) {
    case ProfileKind::ExpI:
      return kPi / params_[0] * std::exp(-s / params_[0]);
    case ProfileKind::MixedII: {
      const double a1 = params_[0], r1 = params_[1], a2 = params_[2],
                   r2 = params_[3];
      return kPi * (a1 / r1 * std::exp(-s / r1) +
                    2.0 * a2 * s / (r2 * r2) * std::exp(-s * s / (r2 * r2)));
    }
    case ProfileKind::RationalIII: {
      const double l2 = params_[0] * params_[0];
      return kPi * l2 / std::pow(l2 + s * s, 1.5);
    }
    case ProfileKind::CustomRadial: {
      if (s < radii_.front())
        throw OutOfRangeError("CustomRadial: radius below first sample");
      if (s >= radii_.back()) return 0.0;
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), s);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      return (values_[i + 1] - values_[i]) / (radii_[i + 1] - radii_[i]);
    }
    case ProfileKind::AmplitudeScaled:
      return params_[0] == 0.0 ? 0.0 : params_[0] * base_->derivative(s);
  }
  return 0.0;
}

double Profile::value(double r) const {
  return raw_value(r * dilation_ / length_unit_);
}

double Profile::derivative(double r) const {
  return dilation_ / length_unit_ * raw_derivative(r * dilation_ / length_unit_);
}

double Profile::scale() const {
  double raw = 1.0;
  switch (kind_) {
    case ProfileKind::ExpI: raw = params_[0]; break;
    case ProfileKind::MixedII: raw = std::max(params_[1], params_[3]); break;
    case ProfileKind::RationalIII: raw = params_[0]; break;
    case ProfileKind::CustomRadial: {
      // e-folding radius of |F| relative to the first sample
      const double f0 = std::abs(values_.front());
      raw = radii_.back();
      for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (std::abs(values_[i]) <= f0 / std::exp(1.0)) {
          raw = std::max(radii_[i], 1e-12);
          break;
        }
      }
      break;
    }
    case ProfileKind::AmplitudeScaled: raw = base_->scale(); break;
  }
  return raw * length_unit_ / dilation_;
}

bool Profile::is_zero() const {
  switch (kind_) {
    case ProfileKind::AmplitudeScaled:
      return params_[0] == 0.0 || base_->is_zero();
    case ProfileKind::CustomRadial:
      return std::all_of(values_.begin(), values_.end(),
                         [](double v) { return v == 0.0; });
    case ProfileKind::MixedII:
      return params_[0] == 0.0 && params_[2] == 0.0;
    default:
      return false;
  }
}

double eval_profile(const Profile& p, double radius) {
  if (!(radius >= 0.0))
    throw ValidationError("eval_profile: radius must be >= 0");
  return p.value(radius);
}

Vec3 grad_profile(const Profile& p, const Vec3& x) {
  const double r = x.norm();
  if (r == 0.0)
    throw SingularPointError("grad_profile: gradient direction undefined at x = 0");
  return p.derivative(r) / r * x;
}

// ---------------------------------------------------------------------------

IsoField IsoField::polar(int m) {
  if (m < 1) throw ValidationError("winding number m must be >= 1");
  IsoField f;
  f.kind_ = IsoFieldKind::Polar;
  f.m_ = m;
  f.scale_invariant_ = true;
  f.name_ = "polar";
  return f;
}

IsoField IsoField::constant(const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw ValidationError("constant iso-vector direction must be nonzero");
  if (std::abs(n - 1.0) > 1e-12)
    throw ValidationError("constant iso-vector direction must be a unit vector");
  IsoField f;
  f.kind_ = IsoFieldKind::Constant;
  f.dir_ = direction / n;
  f.m_ = 0;
  f.scale_invariant_ = true;
  f.name_ = "constant";
  return f;
}

IsoField IsoField::susy_example(double c) {
  if (c == 0.0 || !std::isfinite(c))
    throw ValidationError("susy_example: C must be finite and nonzero");
  IsoField f;
  f.kind_ = IsoFieldKind::SusyExample;
  f.c_ = c;
  f.m_ = 0;
  f.scale_invariant_ = false;
  f.name_ = "susy_example";
  return f;
}

IsoField IsoField::custom(ThetaFn theta, int m, bool scale_invariant,
                          std::string name) {
  if (m < 1) throw ValidationError("winding number m must be >= 1");
  if (!theta) throw ValidationError("custom hedgehog needs a Theta function");
  IsoField f;
  f.kind_ = IsoFieldKind::Custom;
  f.m_ = m;
  f.theta_ = std::move(theta);
  f.scale_invariant_ = scale_invariant;
  f.name_ = std::move(name);
  return f;
}

IsoField IsoField::z_tanh(double width, int m) {
  require_positive(width, "z_tanh width");
  IsoField f = custom(
      [width](double, double z) { return std::acos(std::tanh(z / width)); }, m,
      false, "z_tanh");
  f.width_ = width;
  return f;
}

Vec3 IsoField::direction(const Vec3& x, const Profile& f) const {
  switch (kind_) {
    case IsoFieldKind::Constant:
      return dir_;
    case IsoFieldKind::SusyExample: {
      const double F = f.value(x.norm());
      const double s = std::sqrt(1.0 + c_ * c_);
      return Vec3(std::sin(F) / s, c_ * std::sin(F) / s, std::cos(F));
    }
    case IsoFieldKind::Polar: {
      const double r = x.norm();
      if (r == 0.0)
        throw SingularPointError("hedgehog field is undefined at x = 0");
      if (m_ == 1) return x / r;
      const double rho = std::hypot(x.x(), x.y());
      const double th = std::atan2(x.y(), x.x());
      const double st = rho / r;
      return Vec3(st * std::cos(m_ * th), st * std::sin(m_ * th), x.z() / r);
    }
    case IsoFieldKind::Custom: {
      if (x.norm() == 0.0)
        throw SingularPointError("hedgehog field is undefined at x = 0");
      const double rho = std::hypot(x.x(), x.y());
      const double big_theta = theta_(rho, x.z());
      const double st = std::sin(big_theta);
      if (rho == 0.0 && std::abs(st) > 1e-14)
        throw SingularPointError("hedgehog field is undefined on the z-axis");
      const double th = std::atan2(x.y(), x.x());
      return Vec3(st * std::cos(m_ * th), st * std::sin(m_ * th),
                  std::cos(big_theta));
    }
  }
  return dir_;
}

Eigen::Matrix3d IsoField::jacobian(const Vec3& x, const Profile& f) const {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  if (kind_ == IsoFieldKind::Constant) return j;
  const double r = x.norm();
  if (kind_ == IsoFieldKind::Polar && m_ == 1) {
    if (r == 0.0)
      throw SingularPointError("hedgehog field is undefined at x = 0");
    const Vec3 u = x / r;
    return (Eigen::Matrix3d::Identity() - u * u.transpose()) / r;
  }
  // centered differences, step relative to the local length scale
  const double local =
      kind_ == IsoFieldKind::SusyExample ? std::max(f.scale(), 1e-3) : std::max(r, 1e-3);
  const double h = 1e-5 * local;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (direction(xp, f) - direction(xm, f)) / (2.0 * h);
  }
  return j;
}

// ---------------------------------------------------------------------------

MassField MassField::dilated(double eps) const {
  MassField out = *this;
  out.profile = profile.dilated(eps);
  return out;
}

void MassField::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw ValidationError("mass M must be finite and > 0");
  require_valid_triple(triple);
}

CMat eval_T(const MassField& mf, const Vec3& x) {
  const Vec3 n = mf.iso.direction(x, mf.profile);
  return n[0] * mf.triple.t[0] + n[1] * mf.triple.t[1] + n[2] * mf.triple.t[2];
}

CMat eval_UF(const MassField& mf, const DiracAlgebra& alg, const Vec3& x) {
  const double F = mf.profile.value(x.norm());
  const int d = mf.dim_k();
  CMat u = std::cos(F) * CMat::Identity(4 * d, 4 * d);
  if (std::sin(F) != 0.0) u += kI * std::sin(F) * kron(alg.gamma5, eval_T(mf, x));
  return u;
}

CMat eval_PhiF(const MassField& mf, const Vec3& x) {
  const double F = mf.profile.value(x.norm());
  const int d = mf.dim_k();
  CMat p = std::cos(F) * CMat::Identity(2 * d, 2 * d);
  if (std::sin(F) != 0.0)
    p += kI * std::sin(F) * kron(CMat::Identity(2, 2), eval_T(mf, x));
  return p;
}

CMat sum_dT_squared(const MassField& mf, const Vec3& x) {
  const Eigen::Matrix3d jac = mf.iso.jacobian(x, mf.profile);
  const int d = mf.dim_k();
  CMat s = CMat::Zero(d, d);
  for (int j = 0; j < 3; ++j) {
    const CMat dt = jac(0, j) * mf.triple.t[0] + jac(1, j) * mf.triple.t[1] +
                    jac(2, j) * mf.triple.t[2];
    s += dt * dt;
  }
  return s;
}

double eval_VF(const MassField& mf, const Vec3& x) {
  const CMat s = sum_dT_squared(mf, x);
  const int d = mf.dim_k();
  const double scalar = s.trace().real() / d;
  const double off = max_abs(CMat(s - scalar * CMat::Identity(d, d)));
  if (off > 1e-10 * std::max(1.0, std::abs(scalar))) {
    std::ostringstream os;
    os << "sum_j (D_j T)^2 is not scalar at x = (" << x.transpose()
       << "): deviation " << off;
    throw HypothesisViolation(os.str());
  }
  const Vec3 g = grad_profile(mf.profile, x);
  const double sf = std::sin(mf.profile.value(x.norm()));
  return std::sqrt(g.squaredNorm() + scalar * sf * sf);
}

bool has_radial_VF(const MassField& mf) {
  return mf.iso.kind() == IsoFieldKind::Constant ||
         (mf.iso.kind() == IsoFieldKind::Polar && mf.iso.winding() == 1);
}

double radial_VF(const MassField& mf, double r) {
  if (!has_radial_VF(mf))
    throw UnsupportedConfiguration(
        "radial V_F needs a constant field or the m = 1 polar hedgehog");
  const double fp = mf.profile.derivative(r);
  if (mf.iso.kind() == IsoFieldKind::Constant) return std::abs(fp);
  if (!(r > 0.0))
    throw SingularPointError("radial_VF: hedgehog term undefined at r = 0");
  const double sf = std::sin(mf.profile.value(r));
  return std::sqrt(fp * fp + 2.0 * sf * sf / (r * r));
}

}  // namespace cqsm

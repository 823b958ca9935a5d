// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"

#include "cqsm/field.hpp"

using namespace cqsm;

namespace {

MassField hedgehog(Profile p, double mass = 1.0) {
  return MassField{std::move(p), pauli_triple(), IsoField::polar(1), mass};
}

Vec3 random_point(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  return Vec3(g(rng), g(rng), g(rng));
}

}  // namespace

TEST_CASE("builtin profiles start at -pi and decay") {
  for (const auto& p : {Profile::exp_i(), Profile::mixed_ii(), Profile::rational_iii()}) {
    CAPTURE(to_string(p.kind()));
    CHECK(p.value(0.0) == doctest::Approx(-kPi).epsilon(1e-14));
    const double far = 10.0 * std::max({p.params()[0], p.params().size() > 1 ? p.params()[1] : 0.0,
                                        p.params().size() > 3 ? p.params()[3] : 0.0});
    CHECK(std::abs(p.value(far)) < 0.01 * kPi);
  }
}

TEST_CASE("profile closed forms") {
  const double r = 0.8;
  CHECK(Profile::exp_i(0.55).value(r) == doctest::Approx(-kPi * std::exp(-r / 0.55)));
  CHECK(Profile::mixed_ii(0.65, 0.58, 0.35, 0.5).value(r) ==
        doctest::Approx(-kPi * (0.65 * std::exp(-r / 0.58) + 0.35 * std::exp(-r * r / 0.25))));
  CHECK(Profile::rational_iii(0.6).value(r) ==
        doctest::Approx(-kPi * (1.0 - r / std::sqrt(0.36 + r * r))));
}

TEST_CASE("profile derivatives match central differences") {
  const double h = 1e-5;
  for (const auto& p : {Profile::exp_i(), Profile::mixed_ii(), Profile::rational_iii(),
                        Profile::amplitude_scaled(Profile::exp_i(), 0.3).dilated(0.5),
                        Profile::exp_i().with_length_unit(2.0)}) {
    for (double r : {0.1, 0.5, 1.3, 3.0}) {
      const double fd = (p.value(r + h) - p.value(r - h)) / (2 * h);
      CHECK(p.derivative(r) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("dilation and length unit act on the argument") {
  const auto p = Profile::exp_i(0.55);
  CHECK(p.dilated(0.5).value(1.0) == doctest::Approx(p.value(0.5)));
  CHECK(p.with_length_unit(2.0).value(1.0) == doctest::Approx(p.value(0.5)));
  CHECK(p.dilated(0.5).scale() == doctest::Approx(1.1));
  CHECK_THROWS_AS(p.dilated(0.0), ValidationError);
}

TEST_CASE("amplitude scaling and the zero profile") {
  const auto base = Profile::exp_i();
  const auto a = Profile::amplitude_scaled(base, 0.25);
  CHECK(a.value(0.7) == doctest::Approx(0.25 * base.value(0.7)));
  CHECK(Profile::vanishing().is_zero());
  CHECK(Profile::vanishing().value(0.3) == 0.0);
}

TEST_CASE("custom radial profiles interpolate, extrapolate flat above and reject below") {
  const auto p = Profile::custom_radial({0.5, 1.0, 2.0}, {-2.0, -1.0, 0.0});
  CHECK(p.value(0.75) == doctest::Approx(-1.5));
  CHECK(p.value(1.5) == doctest::Approx(-0.5));
  CHECK(p.value(5.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(p.value(0.25), OutOfRangeError);
  CHECK_THROWS_AS(Profile::custom_radial({0.0, 1.0, 1.0}, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(Profile::custom_radial({0.0, 1.0}, {0.0, NAN}), ValidationError);
}

TEST_CASE("custom radial profiles load from CSV with a header") {
  const std::string path = "cqsm_test_profile.csv";
  {
    std::ofstream f(path);
    f << "r,F\n0,-3.14159\n1,-1\n2,0\n";
  }
  const auto p = Profile::load_csv(path);
  CHECK(p.value(0.5) == doctest::Approx((-3.14159 - 1.0) / 2));
  {
    std::ofstream f(path);
    f << "0,-3\n1,abc\n";
  }
  CHECK_THROWS_AS(Profile::load_csv(path), ValidationError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(Profile::load_csv("does/not/exist.csv"), ValidationError);
}

TEST_CASE("polar hedgehog is a unit field and scale invariant") {
  const auto f = IsoField::polar(2);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = random_point(rng, 2.0);
    CHECK(f.direction(x, Profile::exp_i()).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((f.direction(2.0 * x, Profile::exp_i()) - f.direction(x, Profile::exp_i())).norm() <=
          1e-12);
  }
  CHECK(f.scale_invariant());
  CHECK_FALSE(IsoField::z_tanh(1.0).scale_invariant());
}

TEST_CASE("hedgehog Jacobian matches finite differences") {
  const auto p = Profile::exp_i();
  const double h = 1e-6;
  for (const auto& f : {IsoField::polar(1), IsoField::polar(3), IsoField::z_tanh(0.8, 2),
                        IsoField::susy_example(1.5)}) {
    const Vec3 x(0.7, -0.4, 0.3);
    const Eigen::Matrix3d jac = f.jacobian(x, p);
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      const Vec3 fd = (f.direction(x + e, p) - f.direction(x - e, p)) / (2 * h);
      CHECK((jac.col(j) - fd).norm() <= 1e-8);
    }
  }
}

TEST_CASE("U_F and Phi_F are unitary and T(x) squares to one") {
  const auto alg = weyl_matrices();
  std::mt19937_64 rng(11);
  for (const auto& mf : {hedgehog(Profile::exp_i()), hedgehog(Profile::rational_iii()),
                         MassField{Profile::mixed_ii(), pauli_triple(), IsoField::susy_example(2.0), 1.0},
                         MassField{Profile::exp_i(), tensor_with_identity(pauli_triple(), 2),
                                   IsoField::polar(2), 1.0}}) {
    const int d = mf.dim_k();
    for (int i = 0; i < 100; ++i) {
      const Vec3 x = random_point(rng, 1.5);
      const CMat u = eval_UF(mf, alg, x);
      const CMat phi = eval_PhiF(mf, x);
      const CMat t = eval_T(mf, x);
      CHECK(max_abs(CMat(u * u.adjoint() - CMat::Identity(4 * d, 4 * d))) <= 1e-13);
      CHECK(max_abs(CMat(phi * phi.adjoint() - CMat::Identity(2 * d, 2 * d))) <= 1e-13);
      CHECK(max_abs(CMat(t * t - CMat::Identity(d, d))) <= 1e-13);
      CHECK(max_abs(CMat(t - t.adjoint())) <= 1e-15);
    }
  }
}

TEST_CASE("U_F is block diagonal with Phi_F and its conjugate") {
  const auto alg = weyl_matrices();
  const auto mf = hedgehog(Profile::exp_i());
  const Vec3 x(0.3, 0.2, -0.5);
  const CMat u = eval_UF(mf, alg, x);
  const CMat phi = eval_PhiF(mf, x);
  CHECK(max_abs(CMat(u.block(0, 0, 4, 4) - phi)) <= 1e-14);
  CHECK(max_abs(CMat(u.block(4, 4, 4, 4) - phi.adjoint())) <= 1e-14);
  CHECK(max_abs(CMat(u.block(0, 4, 4, 4))) == 0.0);
}

TEST_CASE("V_F radial form agrees with the pointwise definition") {
  // hedgehog m = 1: sum_j (D_j T)^2 = 2 / r^2, so V^2 = F'^2 + 2 sin^2 F / r^2
  const auto mf = hedgehog(Profile::exp_i());
  for (double r : {0.2, 0.9, 2.5}) {
    const Vec3 x = r * Vec3(0.48, -0.6, 0.64);
    const double f = mf.profile.value(r), fp = mf.profile.derivative(r);
    const double expect = std::sqrt(fp * fp + 2.0 * std::sin(f) * std::sin(f) / (r * r));
    CHECK(eval_VF(mf, x) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(radial_VF(mf, r) == doctest::Approx(expect).epsilon(1e-12));
  }
  const MassField c{Profile::exp_i(), pauli_triple(), IsoField::constant(Vec3::UnitZ()), 1.0};
  CHECK(radial_VF(c, 0.7) == doctest::Approx(std::abs(c.profile.derivative(0.7))));
  CHECK(has_radial_VF(c));
  const MassField m2{Profile::exp_i(), pauli_triple(), IsoField::polar(2), 1.0};
  CHECK_FALSE(has_radial_VF(m2));
  CHECK_THROWS_AS(radial_VF(m2, 1.0), UnsupportedConfiguration);
}

TEST_CASE("winding m hedgehog has |grad n|^2 = (1 + m^2) / r^2") {
  for (int m : {2, 3}) {
    const MassField mf{Profile::exp_i(), pauli_triple(), IsoField::polar(m), 1.0};
    const Vec3 x(0.3, 0.5, 0.2);
    const double r = x.norm();
    const double sf = std::sin(mf.profile.value(r));
    const Vec3 g = grad_profile(mf.profile, x);
    const double expect = std::sqrt(g.squaredNorm() + (1.0 + m * m) * sf * sf / (r * r));
    CHECK(eval_VF(mf, x) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("field evaluation at the origin is an error") {
  const auto mf = hedgehog(Profile::exp_i());
  CHECK_THROWS_AS(eval_T(mf, Vec3::Zero()), SingularPointError);
  CHECK_THROWS_AS(grad_profile(mf.profile, Vec3::Zero()), SingularPointError);
}

TEST_CASE("mass field validation") {
  MassField mf = hedgehog(Profile::exp_i(), 0.0);
  CHECK_THROWS_AS(mf.validate(), ValidationError);
  mf.mass = 1.0;
  mf.triple.t[1] *= 2.0;
  CHECK_THROWS_AS(mf.validate(), ValidationError);
}

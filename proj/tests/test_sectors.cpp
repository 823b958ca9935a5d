// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"

#include "cqsm/bounds.hpp"
#include "cqsm/sectors.hpp"

using namespace cqsm;

namespace {

Eigen::VectorXd random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

MassField hedgehog(double mass = 1.0) {
  return MassField{Profile::exp_i(), pauli_triple(), IsoField::polar(1), mass};
}

}  // namespace

TEST_CASE("sector operator is symmetric in the weighted inner product") {
  const CylGrid cg{6.0, 6.0, 30, 60};
  const auto g = axial_from_radial(Profile::exp_i());
  for (int l : {0, 1, 3})
    for (int s : {1, -1})
      for (ZSign z : {ZSign::Minus, ZSign::Plus}) {
        const auto op = assemble_Ls(g, l, s, 2.0, cg, z);
        const auto f = random_vector(cg.size(), 1), h = random_vector(cg.size(), 2);
        CHECK(weighted_symmetry_residual(op, f, h) <= 1e-12);
        const Eigen::SparseMatrix<double> bt = op.symmetric().transpose();
        CHECK((op.symmetric() - bt).norm() <= 1e-12 * op.symmetric().norm());
      }
}

TEST_CASE("l and -l give the same operator") {
  const CylGrid cg{5.0, 5.0, 20, 40};
  const auto g = axial_from_radial(Profile::exp_i());
  const auto a = assemble_Ls(g, 2, 1, 1.0, cg), b = assemble_Ls(g, -2, 1, 1.0, cg);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
}

TEST_CASE("free sector ground approaches the Dirichlet cylinder value") {
  // j_{0,1}^2 / R^2 + (pi / 2Z)^2
  const double j01 = 2.404825557695773;
  const CylGrid cg{4.0, 4.0, 160, 320};
  const auto op = assemble_Ls(axial_from_radial(Profile::vanishing()), 0, 1, 1.0, cg);
  const auto gs = sector_ground(op);
  CHECK(gs.converged);
  const double exact = j01 * j01 / 16.0 + kPi * kPi / 64.0;
  CHECK(gs.e0 == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("iterative sector ground matches dense levels") {
  const CylGrid cg{5.0, 5.0, 16, 32};
  const auto g = axial_from_radial(Profile::exp_i());
  for (int l : {0, 1}) {
    const auto op = assemble_Ls(g, l, 1, 4.0, cg);
    const auto dense = sector_levels_dense(op, 3);
    const auto gs = sector_ground(op, 1e-10);
    CHECK(gs.converged);
    CHECK(gs.e0 == doctest::Approx(dense[0]).epsilon(1e-8));
    CHECK(dense[0] <= dense[1]);
  }
}

TEST_CASE("eps = 1 scan equals the direct solve") {
  const CylGrid cg{6.0, 6.0, 24, 48};
  const auto g = axial_from_radial(Profile::exp_i());
  const auto scan = sector_epsilon_scan(g, 0, 1, 1, 2.0, {1.0, 0.5}, cg);
  REQUIRE(scan.size() == 2);
  const auto direct = sector_ground(assemble_Ls(g, 0, 1, 2.0, cg));
  CHECK(scan[0].e0 == doctest::Approx(direct.e0).epsilon(1e-9));
  // x = y / eps on the dilated box: L(G_eps, M / eps) = eps^2 L(G, M / eps^2)
  // on the original grid.
  const auto scaled = sector_ground(assemble_Ls(g, 0, 1, 2.0 / 0.25, cg));
  CHECK(scan[1].e0 == doctest::Approx(0.25 * scaled.e0).epsilon(1e-8));
}

TEST_CASE("l = 0 sector ground tracks the 3D S+ ground at large mass") {
  const double mass = 10.0;
  const auto mf = hedgehog(mass);
  const auto s3d = schrodinger_ground(SchrodingerKind::SPlus, mf, GridSpec{4.0, 31});
  const auto sec = sector_ground(
      assemble_Ls(axial_from_radial(mf.profile), 0, 1, mass, CylGrid{4.0, 4.0, 80, 160}));
  CHECK(s3d.converged);
  CHECK(sec.e0 < 0.0);
  CHECK(std::abs(sec.e0 - s3d.ground) <= 0.05 * std::abs(s3d.ground));
}

TEST_CASE("quarter turn commutes with H and has order four up to a phase") {
  const GridSpec g{10.0, 9};
  const auto alg = weyl_matrices();
  const auto mf = hedgehog();
  const auto h = assemble_H(g, mf, alg);
  const auto psi = StateVector::random(g, 8, 17);
  const auto lhs = quarter_turn(h.apply(psi), alg, mf.triple, 1);
  const auto rhs = h.apply(quarter_turn(psi, alg, mf.triple, 1));
  CHECK((lhs - rhs).norm() / h.apply(psi).norm() <= 1e-7);
  StateVector r4 = psi;
  for (int i = 0; i < 4; ++i) r4 = quarter_turn(r4, alg, mf.triple, 1);
  // exp(-2 pi i K3) with K3 integer for m = 1
  CHECK((r4 - psi).norm() / psi.norm() <= 1e-12);
  CHECK(quarter_turn(psi, alg, mf.triple, 1).norm() == doctest::Approx(psi.norm()));
}

TEST_CASE("centred Gaussian with spin and isospin up has K3 = 1") {
  const GridSpec g{6.0, 21};
  const auto alg = weyl_matrices();
  const auto t = pauli_triple();
  CVec internal = CVec::Zero(8);
  internal[0] = 1.0;  // spinor 0, iso 0
  SpectrumResult res;
  res.eigenvalues = {0.0};
  res.eigenvectors = {StateVector::gaussian(g, 8, Vec3::Zero(), 1.0, internal)};
  const auto labels = classify_by_k3(res, assemble_K3(g, alg, t, 1), alg, t, 1, 1e-4);
  REQUIRE(labels.size() == 1);
  CHECK(labels[0].k3_value == doctest::Approx(1.0));
  CHECK(labels[0].l == 0);
  CHECK(labels[0].s == 1);
  CHECK(labels[0].t == 1);
  CHECK(labels[0].k3_variance <= 1e-10);
  CHECK_FALSE(labels[0].mixed);
}

TEST_CASE("H is reduced by the quarter-turn sectors") {
  const auto rep = sector_equivalence_check(GridSpec{10.0, 7}, hedgehog(), weyl_matrices(), 1, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.off_block_residual <= 1e-6);
  CHECK(rep.spectrum_mismatch <= 1e-6);
  int total = 0;
  for (const auto& b : rep.blocks) total += b.dim;
  CHECK(total == 7 * 7 * 7 * 8);
}

TEST_CASE("cylinder grid validation") {
  CHECK_THROWS_AS((CylGrid{-1.0, 4.0, 10, 10}.validate()), ValidationError);
  CHECK_THROWS_AS((CylGrid{4.0, 4.0, 1, 10}.validate()), ValidationError);
  const CylGrid c{4.0, 2.0, 8, 8};
  CHECK(c.scaled(2.0).r_max == doctest::Approx(8.0));
  CHECK(c.scaled(2.0).n_r == 8);
}

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"

#include "cqsm/bounds.hpp"

using namespace cqsm;

namespace {

// For V = exp(-r): V^(k) = 8 pi / (1 + k^2)^2 and 1/|x|^2 has transform
// 2 pi^2 / |k|, so C = 64 pi^2 int_0^inf k / (1 + k^2)^4 dk = 32 pi^2 / 3.
const double kExpKernel = 32.0 * kPi * kPi / 3.0;

MassField hedgehog(double mass = 1.0) {
  return MassField{Profile::exp_i(), pauli_triple(), IsoField::polar(1), mass};
}

}  // namespace

TEST_CASE("radial log-kernel integral of exp(-r)") {
  const auto r = radial_log_kernel_integral([](double a) { return std::exp(-a); }, 40.0, 24, 1.0);
  CHECK(r.value == doctest::Approx(kExpKernel).epsilon(1e-9));
  CHECK(r.error <= 1e-6 * kExpKernel);
  CHECK(r.tail_bound >= 0.0);
  CHECK(r.tail_bound <= 1e-8 * kExpKernel);
}

TEST_CASE("radial integral scales like length^4") {
  // V(r / s) gives s^4 C
  const double s = 0.5;
  const auto r = radial_log_kernel_integral([s](double a) { return std::exp(-a / s); }, 20.0, 24,
                                            0.5);
  CHECK(r.value == doctest::Approx(s * s * s * s * kExpKernel).epsilon(1e-9));
}

TEST_CASE("Monte Carlo integral agrees with the closed form") {
  const auto v = [](const Vec3& x) { return std::exp(-x.norm()); };
  const auto mc = monte_carlo_kernel_integral(v, 2.0, 400000, 7, 1);
  CHECK(std::abs(mc.value - kExpKernel) <= 4.0 * mc.std_error);
  CHECK(mc.std_error <= 0.01 * kExpKernel);
}

TEST_CASE("Monte Carlo results are bit-identical across thread counts") {
  const auto v = [](const Vec3& x) { return std::exp(-x.norm()); };
  const auto a = monte_carlo_kernel_integral(v, 2.0, 100000, 11, 1);
  const auto b = monte_carlo_kernel_integral(v, 2.0, 100000, 11, 3);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  const auto c = monte_carlo_kernel_integral(v, 2.0, 100000, 12, 1);
  CHECK(a.value != c.value);
}

TEST_CASE("radial and Monte Carlo C_F agree for the hedgehog") {
  const auto mf = hedgehog();
  const auto radial = cf_radial(mf, 20.0, 24);
  const auto mc = cf_monte_carlo(mf, 400000, 3, 1);
  CHECK(radial.method == BoundMethod::RadialLogKernel);
  CHECK(std::abs(radial.c_f - mc.c_f) <= 4.0 * mc.quadrature_error_estimate);
  CHECK(radial.n_h_bound == doctest::Approx(nh_bound(radial.c_f, 1.0, 2)));
  CHECK_THROWS_AS(cf_radial(MassField{Profile::exp_i(), pauli_triple(), IsoField::polar(2), 1.0},
                            20.0, 24),
                  UnsupportedConfiguration);
}

TEST_CASE("count bound formula") {
  CHECK(nh_bound(4.0 * kPi * kPi, 1.0, 2) == doctest::Approx(2.0));
  CHECK(nh_bound(kPi * kPi, 2.0, 3) == doctest::Approx(3.0));
}

TEST_CASE("Schroedinger potentials match their pointwise formulas") {
  const GridSpec g{4.0, 9};
  const auto mf = hedgehog(1.5);
  const auto sp = schrodinger_potential(SchrodingerKind::SPlus, mf, g);
  const auto sm = schrodinger_potential(SchrodingerKind::SMinus, mf, g);
  const auto l0 = schrodinger_potential(SchrodingerKind::L0, mf, g);
  for (std::size_t p = 0; p < g.num_nodes(); p += 7) {
    const Vec3 x = g.node(p);
    const double r = x.norm();
    // D_3 cos F = -sin F F'(r) z / r
    const double d3 = -std::sin(mf.profile.value(r)) * mf.profile.derivative(r) * x[2] / r;
    CHECK(sp[p] == doctest::Approx(1.5 * d3).epsilon(1e-12));
    CHECK(sm[p] == doctest::Approx(-1.5 * d3).epsilon(1e-12));
    CHECK(l0[p] == doctest::Approx(-1.5 * radial_VF(mf, r)).epsilon(1e-12));
  }
}

TEST_CASE("bound chain holds on a small grid") {
  const GridSpec g{6.0, 15};
  ChainOptions opt;
  opt.stability_check = false;
  const auto rep = bound_chain_report(hedgehog(), g, opt);
  CHECK(rep.complete);
  CHECK(rep.n_h <= rep.n_l);
  CHECK(rep.n_l <= rep.n_l0);
  CHECK(rep.n_l0 <= rep.bound);
  CHECK(rep.holds);
}

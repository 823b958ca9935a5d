// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <thread>

#include <gsl/gsl_integration.h>

#include "cqsm/hamiltonian.hpp"

namespace cqsm {

std::string to_string(BoundMethod m) {
  return m == BoundMethod::RadialLogKernel ? "radial_log_kernel" : "monte_carlo";
}

std::string to_string(SchrodingerKind k) {
  switch (k) {
    case SchrodingerKind::SPlus: return "S_plus";
    case SchrodingerKind::SMinus: return "S_minus";
    case SchrodingerKind::L0: return "L0";
  }
  return "unknown";
}

double nh_bound(double c_f, double mass, int dim_k) {
  if (c_f < 0.0 || mass < 0.0 || dim_k < 0)
    throw ValidationError("nh_bound: inputs must be nonnegative");
  return dim_k * mass * mass * c_f / (4.0 * kPi * kPi);
}

namespace {

/// Gauss-Legendre rule of a fixed order on [lo, hi].
class GaussRule {
 public:
  explicit GaussRule(int order)
      : table_(gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(order)),
               &gsl_integration_glfixed_table_free),
        order_(order) {
    if (!table_) throw Error("Gauss-Legendre table allocation failed");
  }
  int order() const { return order_; }
  template <typename Fn>
  double integrate(double lo, double hi, Fn&& f) const {
    double s = 0.0;
    for (int i = 0; i < order_; ++i) {
      double x = 0.0, w = 0.0;
      gsl_integration_glfixed_point(lo, hi, static_cast<std::size_t>(i), &x, &w,
                                    table_.get());
      s += w * f(x);
    }
    return s;
  }

 private:
  std::unique_ptr<gsl_integration_glfixed_table,
                  decltype(&gsl_integration_glfixed_table_free)>
      table_;
  int order_;
};

constexpr double kGrading = 3.0;

/// int_0^len g(d) dd for g with a log singularity at d = 0: geometric
/// breakpoints toward 0, graded substitution on the innermost piece and
/// uniform panels of width `panel` further out.
template <typename Fn>
double singular_side(const GaussRule& rule, double len, double panel, Fn&& g) {
  if (len <= 0.0) return 0.0;
  double total = 0.0;
  const double inner = std::min(len, panel) / 1024.0;
  // innermost piece: d = inner * t^k
  total += rule.integrate(0.0, 1.0, [&](double t) {
    const double tk1 = std::pow(t, kGrading - 1.0);
    return g(inner * tk1 * t) * inner * kGrading * tk1;
  });
  double s = inner;
  while (s < len) {
    const double w = std::min({s, panel, len - s});
    total += rule.integrate(s, s + w, g);
    s += w;
  }
  return total;
}

double log_kernel_pass(const std::function<double(double)>& v, double r_max, int order,
                       double panel) {
  const GaussRule rule(order);
  const int panels = std::max(1, static_cast<int>(std::ceil(r_max / panel)));
  const double w = r_max / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    total += rule.integrate(p * w, (p + 1) * w, [&](double a) {
      const double va = v(a);
      if (va == 0.0) return 0.0;
      // b = a + d and b = a - d, with the kernel written in terms of d
      auto above = [&](double d) {
        const double b = a + d;
        return b * v(b) * std::log((a + b) / d);
      };
      auto below = [&](double d) {
        const double b = a - d;
        return b * v(b) * std::log((a + b) / d);
      };
      return a * va *
             (singular_side(rule, r_max - a, w, above) + singular_side(rule, a, w, below));
    });
  }
  return 8.0 * kPi * kPi * total;
}

}  // namespace

RadialIntegral radial_log_kernel_integral(const std::function<double(double)>& v,
                                          double r_max, int n_quad, double panel) {
  if (!(r_max > 0.0)) throw ValidationError("r_max must be > 0");
  if (n_quad < 2) throw ValidationError("n_quad must be >= 2");
  if (!(panel > 0.0)) throw ValidationError("panel width must be > 0");
  RadialIntegral out;
  const double coarse = log_kernel_pass(v, r_max, n_quad, panel);
  out.value = log_kernel_pass(v, r_max, 2 * n_quad, panel);
  out.error = std::abs(out.value - coarse);

  // Tail beyond r_max: C(V) is a positive definite quadratic form, so with
  // V = V1 + V2 (V2 supported outside r_max)
  //   C(V) - C(V1) <= 2 sqrt(C(V1) C(V2)) + C(V2),
  // and C(V2) <= K |V2|_{3/2}^2 by the sharp Hardy-Littlewood-Sobolev
  // inequality, K = pi^(3/2) (Gamma(3/2) / Gamma(3))^(-1/3).
  const double hls = std::pow(kPi, 1.5) * std::pow(std::tgamma(1.5) / 2.0, -1.0 / 3.0);
  const GaussRule rule(2 * n_quad);
  double l32 = 0.0;
  const double far = 4.0 * r_max;
  const int tail_panels = std::max(1, static_cast<int>(std::ceil((far - r_max) / panel)));
  const double tw = (far - r_max) / tail_panels;
  for (int p = 0; p < tail_panels; ++p)
    l32 += rule.integrate(r_max + p * tw, r_max + (p + 1) * tw, [&](double r) {
      return 4.0 * kPi * r * r * std::pow(std::abs(v(r)), 1.5);
    });
  const double c2 = hls * std::pow(l32, 4.0 / 3.0);
  out.tail_bound = 2.0 * std::sqrt(std::max(out.value, 0.0) * c2) + c2;
  return out;
}

BoundReport cf_radial(const MassField& mf, double r_max, int n_quad) {
  mf.validate();
  if (!has_radial_VF(mf))
    throw UnsupportedConfiguration(
        "cf_radial needs a radial V_F (constant field or m = 1 polar hedgehog); "
        "use cf_monte_carlo");
  const double scale = mf.profile.scale();
  if (r_max < 10.0 * scale)
    throw ValidationError("cf_radial: r_max must be at least 10 profile scales");
  BoundReport rep;
  rep.method = BoundMethod::RadialLogKernel;
  rep.r_max = r_max;
  rep.n_quad = n_quad;
  if (mf.profile.is_zero()) return rep;
  const auto integral = radial_log_kernel_integral(
      [&](double r) { return radial_VF(mf, r); }, r_max, n_quad, 0.5 * scale);
  rep.c_f = integral.value;
  rep.quadrature_error_estimate = integral.error;
  rep.tail_bound = integral.tail_bound;
  rep.n_h_bound = nh_bound(rep.c_f, mf.mass, mf.dim_k());
  return rep;
}

namespace {

constexpr long kBatch = 1L << 16;
// Proposal length in units of the profile scale. With twice the decay
// length of V the importance weight V(x) V(x + z) / (p(x) q(z)) stays
// bounded for exponentially decaying V.
constexpr double kMcScale = 2.0;

struct BatchSum {
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;
};

Vec3 random_direction(std::mt19937_64& rng) {
  const double u = std::generate_canonical<double, 53>(rng);
  const double phi = 2.0 * kPi * std::generate_canonical<double, 53>(rng);
  const double c = 2.0 * u - 1.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return {s * std::cos(phi), s * std::sin(phi), c};
}

double exp_variate(std::mt19937_64& rng) {
  return -std::log1p(-std::generate_canonical<double, 53>(rng));
}

BatchSum run_batch(const std::function<double(const Vec3&)>& v, double rho, long count,
                   unsigned long seed, long batch) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(batch),
                    static_cast<std::uint64_t>(0x5bd1e995)};
  std::mt19937_64 rng(seq);
  BatchSum out;
  const double norm_x = 8.0 * kPi * rho * rho * rho;
  for (long i = 0; i < count; ++i) {
    // |x| ~ Gamma(3, rho): density exp(-|x| / rho) / (8 pi rho^3)
    const double r = rho * (exp_variate(rng) + exp_variate(rng) + exp_variate(rng));
    const Vec3 x = r * random_direction(rng);
    // |z| ~ Exp(rho): density exp(-|z| / rho) / (4 pi rho |z|^2)
    const double s = rho * exp_variate(rng);
    const Vec3 z = s * random_direction(rng);
    double f = 0.0;
    const double vx = v(x);
    if (vx != 0.0) {
      const double vy = v(x + z);
      f = vx * vy * 4.0 * kPi * rho * std::exp(s / rho) * norm_x * std::exp(r / rho);
    }
    out.sum += f;
    out.sum_sq += f * f;
    ++out.count;
  }
  return out;
}

}  // namespace

MonteCarloIntegral monte_carlo_kernel_integral(const std::function<double(const Vec3&)>& v,
                                               double rho, long samples,
                                               unsigned long seed, int threads) {
  if (samples < 2) throw ValidationError("Monte Carlo needs at least 2 samples");
  if (!(rho > 0.0)) throw ValidationError("Monte Carlo scale rho must be > 0");
  const long batches = (samples + kBatch - 1) / kBatch;
  std::vector<BatchSum> sums(static_cast<std::size_t>(batches));
  auto work = [&](long first, long stride) {
    for (long b = first; b < batches; b += stride) {
      const long count = std::min(kBatch, samples - b * kBatch);
      sums[static_cast<std::size_t>(b)] = run_batch(v, rho, count, seed, b);
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& b : sums) {
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  const double n = static_cast<double>(samples);
  MonteCarloIntegral out;
  out.value = sum / n;
  const double var = std::max(0.0, sum_sq / n - out.value * out.value) * n / (n - 1.0);
  out.std_error = std::sqrt(var / n);
  return out;
}

BoundReport cf_monte_carlo(const MassField& mf, long samples, unsigned long seed,
                           int threads) {
  mf.validate();
  BoundReport rep;
  rep.method = BoundMethod::MonteCarlo;
  rep.samples = samples;
  rep.seed = seed;
  if (mf.profile.is_zero()) return rep;
  const auto mc = monte_carlo_kernel_integral(
      [&](const Vec3& x) { return eval_VF(mf, x); }, kMcScale * mf.profile.scale(), samples,
      seed, threads);
  rep.c_f = mc.value;
  rep.quadrature_error_estimate = mc.std_error;
  rep.n_h_bound = nh_bound(rep.c_f, mf.mass, mf.dim_k());
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<double> schrodinger_potential(SchrodingerKind kind, const MassField& mf,
                                          const GridSpec& grid) {
  mf.validate();
  grid.validate();
  std::vector<double> pot(grid.num_nodes());
  for (std::size_t p = 0; p < grid.num_nodes(); ++p) {
    const Vec3 x = grid.node(p);
    if (kind == SchrodingerKind::L0) {
      pot[p] = -mf.mass * eval_VF(mf, x);
      continue;
    }
    // D_3 cos F = -sin F F'(r) z / r
    const double r = x.norm();
    const double d3 = -std::sin(mf.profile.value(r)) * mf.profile.derivative(r) * x[2] / r;
    pot[p] = (kind == SchrodingerKind::SPlus ? 1.0 : -1.0) * mf.mass * d3;
  }
  return pot;
}

SchrodingerResult schrodinger_ground(SchrodingerKind kind, const MassField& mf,
                                     const GridSpec& grid, const SchrodingerOptions& opt) {
  const auto pot = schrodinger_potential(kind, mf, grid);
  SchrodingerResult out;
  out.kind = kind;
  const double delta = opt.edge_fraction * mf.mass;
  out.eta = mf.mass * mf.mass - (mf.mass - delta) * (mf.mass - delta);
  ScalarSolveOptions so;
  so.tol = opt.tol;
  so.max_levels = opt.max_levels;
  so.seed = opt.seed;
  const double threshold =
      kind == SchrodingerKind::L0 ? -out.eta : -std::numeric_limits<double>::infinity();
  const auto levels = scalar_levels(grid, pot, threshold, so);
  out.ground = levels.ground;
  out.converged = levels.converged;
  out.truncated = levels.truncated;
  if (kind == SchrodingerKind::L0) {
    out.n_minus_scalar = levels.count_below;
    out.n_minus = 4 * mf.dim_k() * levels.count_below;
  }
  return out;
}

ChainReport bound_chain_report(const MassField& mf, const GridSpec& grid,
                               const ChainOptions& opt) {
  ChainReport rep;
  const auto alg = weyl_matrices();
  const auto h = assemble_H(grid, mf, alg);

  auto counts = [&](double tol, int& n_h, int& n_l, int& n_l0) {
    GapSolveOptions g = opt.gap;
    g.tol = tol;
    g.keep_vectors = false;
    const auto res = gap_eigenvalues(h, g);
    if (!res.info.converged || res.info.truncated) rep.complete = false;
    n_h = static_cast<int>(res.eigenvalues.size());
    n_l = res.folded_count;
    SchrodingerOptions s = opt.schrodinger;
    s.tol = tol;
    const auto l0 = schrodinger_ground(SchrodingerKind::L0, mf, grid, s);
    if (!l0.converged || l0.truncated) rep.complete = false;
    n_l0 = l0.n_minus;
  };
  counts(opt.gap.tol, rep.n_h, rep.n_l, rep.n_l0);
  if (opt.stability_check) {
    int a = 0, b = 0, c = 0;
    counts(0.1 * opt.gap.tol, a, b, c);
    rep.stable = a == rep.n_h && b == rep.n_l && c == rep.n_l0;
  }

  const double r_max = opt.r_max > 0.0 ? opt.r_max : 30.0 * mf.profile.scale();
  if (has_radial_VF(mf)) {
    rep.c_f = cf_radial(mf, r_max, opt.n_quad);
  } else {
    const long samples = opt.mc_samples > 0 ? opt.mc_samples : 1000000;
    rep.c_f = cf_monte_carlo(mf, samples, opt.mc_seed, opt.threads);
    rep.note = "C_F from Monte Carlo (V_F not radial)";
  }
  if (opt.mc_samples > 0 && has_radial_VF(mf)) {
    rep.c_f_mc = cf_monte_carlo(mf, opt.mc_samples, opt.mc_seed, opt.threads);
    rep.have_mc = true;
  }
  rep.bound = rep.c_f.n_h_bound;
  rep.holds = rep.n_h <= rep.n_l && rep.n_l <= rep.n_l0 && rep.n_l0 <= rep.bound;
  return rep;
}

}  // namespace cqsm

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/hamiltonian.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cqsm {

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::H: return "H";
    case OperatorKind::HEps: return "H_eps";
    case OperatorKind::HB: return "HB";
    case OperatorKind::K3: return "K3";
    case OperatorKind::Gamma: return "Gamma";
    case OperatorKind::XF: return "XF";
  }
  return "unknown";
}

class OperatorBuilder {
 public:
  static DiscreteOperator make(OperatorKind kind, const GridSpec& grid, int dim,
                               const DiracAlgebra& alg) {
    grid.validate();
    DiscreteOperator op;
    op.kind_ = kind;
    op.grid_ = grid;
    op.dim_ = dim;
    op.spectral_ = SpectralGrid::get(grid);
    op.alpha_ = alg.alpha;
    op.uniform_ = CMat();
    return op;
  }
  static void set_kinetic(DiscreteOperator& op, double s) { op.kinetic_ = s; }
  static void set_angular(DiscreteOperator& op, double s) { op.angular_ = s; }
  static void set_uniform(DiscreteOperator& op, CMat u) { op.uniform_ = std::move(u); }
  static void set_mass(DiscreteOperator& op, double gap_mass, double eps) {
    op.gap_mass_ = gap_mass;
    op.eps_ = eps;
  }
  static void set_scale_invariant(DiscreteOperator& op, bool v) {
    op.scale_invariant_ = v;
  }

  /// Fills the pointwise table from `f(x)`; field errors are rethrown with the
  /// offending node attached.
  template <typename Fn>
  static void fill_pointwise(DiscreteOperator& op, Fn&& f) {
    const int d = op.dim_;
    const std::size_t nodes = op.grid_.num_nodes();
    op.pointwise_.assign(nodes * d * d, cd{});
    for (std::size_t p = 0; p < nodes; ++p) {
      const Vec3 x = op.grid_.node(p);
      CMat m;
      try {
        m = f(x);
      } catch (const Error& e) {
        std::ostringstream os;
        os << "assembly of " << to_string(op.kind_) << " failed at node " << p
           << " x = (" << x.transpose() << "): " << e.what();
        throw Error(os.str());
      }
      Eigen::Map<CMat>(op.pointwise_.data() + p * d * d, d, d) = m;
    }
    // structural zeros (the off-diagonal blocks of beta U_F, say) are skipped
    // in apply when they make up at least half the table
    std::vector<char> used(static_cast<std::size_t>(d) * d, 0);
    for (std::size_t p = 0; p < nodes; ++p)
      for (int e = 0; e < d * d; ++e)
        if (op.pointwise_[p * d * d + e] != cd{}) used[e] = 1;
    op.pattern_.clear();
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r)
        if (used[c * d + r]) op.pattern_.emplace_back(r, c);
    if (2 * op.pattern_.size() > static_cast<std::size_t>(d) * d) op.pattern_.clear();
  }
};

CMat DiscreteOperator::pointwise_at(std::size_t node) const {
  if (pointwise_.empty()) return CMat::Zero(dim_, dim_);
  return Eigen::Map<const CMat>(pointwise_.data() + node * dim_ * dim_, dim_, dim_);
}

namespace {

template <int D>
void pointwise_fixed(const std::vector<cd>& table, const cd* in, cd* out,
                     std::size_t nodes, bool adjoint) {
  using M = Eigen::Matrix<cd, D, D>;
  using V = Eigen::Matrix<cd, D, 1>;
  for (std::size_t p = 0; p < nodes; ++p) {
    Eigen::Map<const M> a(table.data() + p * D * D);
    Eigen::Map<const V> v(in + p * D);
    Eigen::Map<V> o(out + p * D);
    if (adjoint)
      o.noalias() += a.adjoint() * v;
    else
      o.noalias() += a * v;
  }
}

void pointwise_dynamic(const std::vector<cd>& table, const cd* in, cd* out,
                       std::size_t nodes, int d, bool adjoint) {
  for (std::size_t p = 0; p < nodes; ++p) {
    Eigen::Map<const CMat> a(table.data() + p * d * d, d, d);
    Eigen::Map<const CVec> v(in + p * d, d);
    Eigen::Map<CVec> o(out + p * d, d);
    if (adjoint)
      o.noalias() += a.adjoint() * v;
    else
      o.noalias() += a * v;
  }
}

}  // namespace

void DiscreteOperator::apply_impl(const cd* in, cd* out, bool adjoint) const {
  counter_->fetch_add(1, std::memory_order_relaxed);
  const std::size_t nodes = grid_.num_nodes();
  const std::size_t total = nodes * dim_;
  std::fill(out, out + total, cd{});
  const int n = grid_.n;
  const auto& k = spectral_->k();
  const int dk = dim_ / 4;

  if (kinetic_ != 0.0) {
    // nonzero entries of alpha_j, so the symbol costs a few flops per node
    struct Entry {
      int row, col, axis;
      cd value;
    };
    std::vector<Entry> entries;
    for (int ax = 0; ax < 3; ++ax)
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          if (alpha_[ax](r, c) != cd{}) entries.push_back({r, c, ax, alpha_[ax](r, c)});
    thread_local std::vector<cd> hat, tmp;
    hat.resize(total);
    tmp.assign(total, cd{});
    spectral_->forward(in, hat.data(), dim_);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const double kk[3] = {k[i], k[j], k[l]};
          const std::size_t base = grid_.index(i, j, l) * dim_;
          const cd* src = hat.data() + base;
          cd* dst = tmp.data() + base;
          for (const auto& e : entries) {
            const cd f = kinetic_ * kk[e.axis] * e.value;
            for (int a = 0; a < dk; ++a) dst[e.row * dk + a] += f * src[e.col * dk + a];
          }
        }
    spectral_->backward(tmp.data(), out, dim_);
  }

  if (angular_ != 0.0) {
    // L3 = -(i/2)[(x1 D2 - x2 D1) + (D2 x1 - D1 x2)]
    std::vector<cd> hat(total), d1(total), d2(total), x1p(total), x2p(total);
    spectral_->forward(in, hat.data(), dim_);
    std::vector<cd> w(total);
    auto multiply_k = [&](const std::vector<cd>& src, std::vector<cd>& dst, int axis) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const double kk = axis == 0 ? k[i] : (axis == 1 ? k[j] : k[l]);
            const std::size_t base = grid_.index(i, j, l) * dim_;
            for (int c = 0; c < dim_; ++c) dst[base + c] = kI * kk * src[base + c];
          }
    };
    multiply_k(hat, w, 1);
    spectral_->backward(w.data(), d2.data(), dim_);
    multiply_k(hat, w, 0);
    spectral_->backward(w.data(), d1.data(), dim_);
    for (std::size_t p = 0; p < nodes; ++p) {
      const Vec3 x = grid_.node(p);
      for (int c = 0; c < dim_; ++c) {
        x1p[p * dim_ + c] = x[0] * in[p * dim_ + c];
        x2p[p * dim_ + c] = x[1] * in[p * dim_ + c];
      }
    }
    std::vector<cd> h1(total), h2(total);
    spectral_->forward(x1p.data(), h1.data(), dim_);
    spectral_->forward(x2p.data(), h2.data(), dim_);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const std::size_t base = grid_.index(i, j, l) * dim_;
          for (int c = 0; c < dim_; ++c)
            w[base + c] = kI * k[j] * h1[base + c] - kI * k[i] * h2[base + c];
        }
    std::vector<cd> part2(total);
    spectral_->backward(w.data(), part2.data(), dim_);
    for (std::size_t p = 0; p < nodes; ++p) {
      const Vec3 x = grid_.node(p);
      for (int c = 0; c < dim_; ++c) {
        const std::size_t q = p * dim_ + c;
        const cd part1 = x[0] * d2[q] - x[1] * d1[q];
        out[q] += angular_ * (-0.5 * kI) * (part1 + part2[q]);
      }
    }
  }

  if (!pointwise_.empty() && !pattern_.empty()) {
    const int d = dim_;
    for (std::size_t p = 0; p < nodes; ++p) {
      const cd* a = pointwise_.data() + p * d * d;
      const cd* v = in + p * d;
      cd* o = out + p * d;
      if (adjoint)
        for (const auto& [r, c] : pattern_) o[c] += std::conj(a[c * d + r]) * v[r];
      else
        for (const auto& [r, c] : pattern_) o[r] += a[c * d + r] * v[c];
    }
  } else if (!pointwise_.empty()) {
    if (dim_ == 8)
      pointwise_fixed<8>(pointwise_, in, out, nodes, adjoint);
    else if (dim_ == 4)
      pointwise_fixed<4>(pointwise_, in, out, nodes, adjoint);
    else
      pointwise_dynamic(pointwise_, in, out, nodes, dim_, adjoint);
  }

  if (uniform_.size() > 0) {
    const CMat u = adjoint ? CMat(uniform_.adjoint()) : uniform_;
    for (std::size_t p = 0; p < nodes; ++p) {
      Eigen::Map<const CVec> v(in + p * dim_, dim_);
      Eigen::Map<CVec> o(out + p * dim_, dim_);
      o.noalias() += u * v;
    }
  }
}

void DiscreteOperator::apply(const cd* in, cd* out) const {
  apply_impl(in, out, false);
}

StateVector DiscreteOperator::apply(const StateVector& psi) const {
  if (psi.size() != size() || !(psi.grid() == grid_))
    throw DimensionMismatch("apply: state does not match operator dimensions");
  StateVector out(grid_, dim_);
  apply_impl(psi.data(), out.data(), false);
  return out;
}

StateVector DiscreteOperator::apply_adjoint(const StateVector& psi) const {
  if (psi.size() != size() || !(psi.grid() == grid_))
    throw DimensionMismatch("apply: state does not match operator dimensions");
  StateVector out(grid_, dim_);
  apply_impl(psi.data(), out.data(), true);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

DiscreteOperator dirac_with_mass(OperatorKind kind, const GridSpec& grid,
                                 const MassField& mf, const DiracAlgebra& alg,
                                 double eps) {
  mf.validate();
  const int d = mf.dim_k();
  auto op = OperatorBuilder::make(kind, grid, 4 * d, alg);
  OperatorBuilder::set_kinetic(op, 1.0);
  const MassField scaled = eps == 1.0 ? mf : mf.dilated(eps);
  const double coupling = mf.mass / eps;
  const CMat beta = kron(alg.beta, CMat::Identity(d, d));
  OperatorBuilder::fill_pointwise(op, [&](const Vec3& x) -> CMat {
    return coupling * beta * eval_UF(scaled, alg, x);
  });
  OperatorBuilder::set_mass(op, coupling, eps);
  OperatorBuilder::set_scale_invariant(op, mf.iso.scale_invariant());
  return op;
}

}  // namespace

DiscreteOperator assemble_H(const GridSpec& grid, const MassField& mf,
                            const DiracAlgebra& alg) {
  return dirac_with_mass(OperatorKind::H, grid, mf, alg, 1.0);
}

DiscreteOperator assemble_H_eps(const GridSpec& grid, const MassField& mf,
                                const DiracAlgebra& alg, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ValidationError("assemble_H_eps: eps must be finite and > 0");
  return dirac_with_mass(OperatorKind::HEps, grid, mf, alg, eps);
}

DiscreteOperator assemble_HB(const GridSpec& grid, const MassField& mf,
                             const DiracAlgebra& alg) {
  mf.validate();
  if (!mf.iso.is_constant())
    throw UnsupportedConfiguration(
        "assemble_HB: H(B) is defined for a constant iso-spin field T only");
  const int d = mf.dim_k();
  auto op = OperatorBuilder::make(OperatorKind::HB, grid, 4 * d, alg);
  OperatorBuilder::set_kinetic(op, 1.0);
  const CMat t = eval_T(mf, Vec3(1.0, 0.0, 0.0));
  const CMat mass = mf.mass * kron(alg.beta, CMat::Identity(d, d));
  std::array<CMat, 3> spin_t;
  for (int j = 0; j < 3; ++j) spin_t[j] = kron(alg.spin(j), t);
  OperatorBuilder::fill_pointwise(op, [&](const Vec3& x) -> CMat {
    const Vec3 g = grad_profile(mf.profile, x);
    CMat m = mass;
    for (int j = 0; j < 3; ++j) m -= 0.5 * g[j] * spin_t[j];
    return m;
  });
  OperatorBuilder::set_mass(op, mf.mass, 1.0);
  return op;
}

DiscreteOperator assemble_K3(const GridSpec& grid, const DiracAlgebra& alg,
                             const IsoSpinTriple& triple, int m) {
  require_valid_triple(triple);
  const int d = triple.dim_k;
  auto op = OperatorBuilder::make(OperatorKind::K3, grid, 4 * d, alg);
  OperatorBuilder::set_angular(op, 1.0);
  CMat u = 0.5 * kron(alg.spin(2), CMat::Identity(d, d)) +
           0.5 * m * kron(CMat::Identity(4, 4), triple.t[2]);
  OperatorBuilder::set_uniform(op, std::move(u));
  return op;
}

DiscreteOperator assemble_Gamma(const GridSpec& grid, const DiracAlgebra& alg,
                                const XiOperator& xi) {
  const int d = static_cast<int>(xi.xi.rows());
  auto op = OperatorBuilder::make(OperatorKind::Gamma, grid, 4 * d, alg);
  OperatorBuilder::set_uniform(op, grading_matrix(alg, xi));
  return op;
}

DiscreteOperator assemble_XF(const GridSpec& grid, const MassField& mf,
                             const DiracAlgebra& alg) {
  mf.validate();
  const int d = mf.dim_k();
  auto op = OperatorBuilder::make(OperatorKind::XF, grid, 4 * d, alg);
  const Mat4c id4 = Mat4c::Identity();
  const CMat p_plus = 0.5 * (id4 + alg.gamma5);
  const CMat p_minus = 0.5 * (id4 - alg.gamma5);
  const CMat idk = CMat::Identity(d, d);
  OperatorBuilder::fill_pointwise(op, [&](const Vec3& x) -> CMat {
    const double f = mf.profile.value(x.norm());
    const CMat t = std::sin(0.5 * f) == 0.0 ? CMat::Zero(d, d) : eval_T(mf, x);
    // exp(+-i F T / 2) in closed form, valid because T^2 = I
    const CMat e_plus = std::cos(0.5 * f) * idk + kI * std::sin(0.5 * f) * t;
    const CMat e_minus = std::cos(0.5 * f) * idk - kI * std::sin(0.5 * f) * t;
    return kron(p_plus, e_plus) + kron(p_minus, e_minus);
  });
  return op;
}

StateVector apply_XF(const MassField& mf, const DiracAlgebra& alg,
                     const StateVector& psi) {
  return assemble_XF(psi.grid(), mf, alg).apply(psi);
}

// ---------------------------------------------------------------------------

double self_adjointness_residual(const DiscreteOperator& op,
                                 const StateVector& phi,
                                 const StateVector& psi) {
  const cd a = phi.inner(op.apply(psi));
  const cd b = op.apply(phi).inner(psi);
  return std::abs(a - b) / (phi.norm() * psi.norm());
}

double chiral_commutator_residual(const DiscreteOperator& h,
                                  const MassField& mf, const DiracAlgebra& alg,
                                  const StateVector& psi) {
  if (h.kind() != OperatorKind::H)
    throw UnsupportedConfiguration("chiral_commutator_residual expects kind H");
  const int d = mf.dim_k();
  const GridSpec& g = h.grid();
  const CMat g5 = kron(alg.gamma5, CMat::Identity(d, d));
  const CMat g5b = kron(alg.gamma5 * alg.beta, CMat::Identity(d, d));
  StateVector g5psi(g, 4 * d);
  for (std::size_t p = 0; p < g.num_nodes(); ++p)
    Eigen::Map<CVec>(g5psi.data() + p * 4 * d, 4 * d) =
        g5 * Eigen::Map<const CVec>(psi.data() + p * 4 * d, 4 * d);
  const StateVector h_g5psi = h.apply(g5psi);
  const StateVector hpsi = h.apply(psi);
  StateVector diff(g, 4 * d);
  for (std::size_t p = 0; p < g.num_nodes(); ++p) {
    const Vec3 x = g.node(p);
    Eigen::Map<const CVec> v(psi.data() + p * 4 * d, 4 * d);
    const CVec comm = g5 * Eigen::Map<const CVec>(hpsi.data() + p * 4 * d, 4 * d) -
                      Eigen::Map<const CVec>(h_g5psi.data() + p * 4 * d, 4 * d);
    const CVec rhs = 2.0 * mf.mass * g5b * (eval_UF(mf, alg, x) * v);
    Eigen::Map<CVec>(diff.data() + p * 4 * d, 4 * d) = comm - rhs;
  }
  return diff.norm() / psi.norm();
}

double susy_residual(const DiscreteOperator& h, const DiscreteOperator& gamma,
                     const StateVector& psi) {
  if (gamma.kind() != OperatorKind::Gamma)
    throw UnsupportedConfiguration("susy_residual expects a Gamma operator");
  const StateVector a = h.apply(gamma.apply(psi));
  const StateVector b = gamma.apply(h.apply(psi));
  return (a + b).norm() / psi.norm();
}

bool in_susy_family(const GridSpec& grid, const MassField& mf,
                    const XiOperator& xi, double tol) {
  for (std::size_t p = 0; p < grid.num_nodes(); ++p) {
    const Vec3 x = grid.node(p);
    const double sf = std::sin(mf.profile.value(x.norm()));
    if (sf == 0.0) continue;
    const CMat t = eval_T(mf, x);
    if (max_abs(CMat((xi.xi * t + t * xi.xi) * sf)) > tol) return false;
  }
  return true;
}

double h_squared_residual(const DiscreteOperator& h, const MassField& mf,
                          const DiracAlgebra& alg, const StateVector& psi) {
  if (h.kind() != OperatorKind::H)
    throw UnsupportedConfiguration("h_squared_residual expects kind H");
  const int d = mf.dim_k();
  const int dim = 4 * d;
  const GridSpec& g = h.grid();
  const std::size_t nodes = g.num_nodes();
  const auto spectral = SpectralGrid::get(g);
  const double m = mf.mass;

  // sampled U_F table, dim x dim per node
  std::vector<cd> table(nodes * dim * dim);
  for (std::size_t p = 0; p < nodes; ++p)
    Eigen::Map<CMat>(table.data() + p * dim * dim, dim, dim) =
        eval_UF(mf, alg, g.node(p));

  const CMat idk = CMat::Identity(d, d);
  StateVector rhs(g, dim);
  std::vector<cd> lap(nodes * dim);
  spectral->laplacian(psi.data(), lap.data(), dim);
  for (std::size_t q = 0; q < nodes * dim; ++q)
    rhs.data()[q] = -lap[q] + m * m * psi.data()[q];

  std::vector<cd> du(table.size());
  for (int j = 0; j < 3; ++j) {
    spectral->derivative(table.data(), du.data(), dim * dim, j);
    const CMat ba = kI * m * kron(alg.beta * alg.alpha[j], idk);
    for (std::size_t p = 0; p < nodes; ++p) {
      Eigen::Map<const CMat> dup(du.data() + p * dim * dim, dim, dim);
      Eigen::Map<const CVec> v(psi.data() + p * dim, dim);
      Eigen::Map<CVec>(rhs.data() + p * dim, dim) += ba * (dup * v);
    }
  }
  const StateVector hh = h.apply(h.apply(psi));
  return (hh - rhs).norm() / psi.norm();
}

double k3_commutator_residual(const DiscreteOperator& h_eps,
                              const DiscreteOperator& k3,
                              const StateVector& psi) {
  if (k3.kind() != OperatorKind::K3)
    throw UnsupportedConfiguration("k3_commutator_residual expects a K3 operator");
  const StateVector a = h_eps.apply(k3.apply(psi));
  const StateVector b = k3.apply(h_eps.apply(psi));
  return (a - b).norm() / psi.norm();
}

double xf_conjugation_residual(const DiscreteOperator& h,
                               const DiscreteOperator& hb,
                               const DiscreteOperator& xf,
                               const StateVector& psi) {
  const StateVector a = xf.apply(h.apply(xf.apply_adjoint(psi)));
  const StateVector b = hb.apply(psi);
  return (a - b).norm() / psi.norm();
}

CMat to_dense(const DiscreteOperator& op) {
  const std::size_t n = op.size();
  CMat dense(n, n);
  std::vector<cd> e(n, cd{}), col(n);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    op.apply(e.data(), col.data());
    e[c] = 0.0;
    std::copy(col.begin(), col.end(), dense.col(static_cast<Eigen::Index>(c)).data());
  }
  return dense;
}

ModeSymbol mode_symbol(const DiscreteOperator& op, int mx, int my, int mz) {
  const GridSpec& g = op.grid();
  const int dim = op.internal_dim();
  const std::size_t nodes = g.num_nodes();
  ModeSymbol out;
  out.k = Vec3(g.wavenumber(mx), g.wavenumber(my), g.wavenumber(mz));
  out.symbol = CMat::Zero(dim, dim);
  std::vector<cd> wave(nodes);
  for (std::size_t p = 0; p < nodes; ++p)
    wave[p] = std::exp(kI * out.k.dot(g.node(p)));
  StateVector psi(g, dim);
  for (int c = 0; c < dim; ++c) {
    psi.vec().setZero();
    for (std::size_t p = 0; p < nodes; ++p) psi(p, c) = wave[p];
    const StateVector a = op.apply(psi);
    for (int c2 = 0; c2 < dim; ++c2) {
      cd s{};
      for (std::size_t p = 0; p < nodes; ++p) s += std::conj(wave[p]) * a(p, c2);
      out.symbol(c2, c) = s / static_cast<double>(nodes);
    }
    double leak = 0.0;
    for (std::size_t p = 0; p < nodes; ++p)
      for (int c2 = 0; c2 < dim; ++c2)
        leak += std::norm(a(p, c2) - out.symbol(c2, c) * wave[p]);
    out.leakage = std::max(out.leakage, std::sqrt(leak / nodes));
  }
  return out;
}

std::vector<ModeSymbol> all_mode_symbols(const DiscreteOperator& op, unsigned long seed) {
  const GridSpec& g = op.grid();
  const int dim = op.internal_dim();
  const int n = g.n;
  const std::size_t nodes = g.num_nodes();
  const auto fft = SpectralGrid::get(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);

  // symbols[draw][mode] column by column
  std::vector<std::vector<CMat>> sym(2, std::vector<CMat>(nodes, CMat::Zero(dim, dim)));
  std::vector<cd> hat(nodes * dim), psi(nodes * dim), out(nodes * dim), phase(nodes);
  for (int draw = 0; draw < 2; ++draw) {
    for (auto& z : phase) z = std::polar(1.0, angle(rng));
    for (int c = 0; c < dim; ++c) {
      std::fill(hat.begin(), hat.end(), cd{});
      for (std::size_t m = 0; m < nodes; ++m) hat[m * dim + c] = phase[m];
      fft->backward(hat.data(), psi.data(), dim);
      op.apply(psi.data(), out.data());
      fft->forward(out.data(), hat.data(), dim);
      for (std::size_t m = 0; m < nodes; ++m)
        for (int c2 = 0; c2 < dim; ++c2) sym[draw][m](c2, c) = hat[m * dim + c2] / phase[m];
    }
  }
  std::vector<ModeSymbol> result(nodes);
  for (int mx = 0; mx < n; ++mx)
    for (int my = 0; my < n; ++my)
      for (int mz = 0; mz < n; ++mz) {
        const std::size_t m = g.index(mx, my, mz);
        auto& r = result[m];
        r.k = Vec3(g.wavenumber(mx), g.wavenumber(my), g.wavenumber(mz));
        r.symbol = sym[0][m];
        r.leakage = max_abs(CMat(sym[0][m] - sym[1][m]));
      }
  return result;
}

}  // namespace cqsm

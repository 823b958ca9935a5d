// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <cstdio>
#include <cstdlib>

#include <lapacke.h>

#include "cqsm/lobpcg.hpp"

namespace cqsm {

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::Iterative: return "lobpcg";
    case SolveMethod::Dense: return "dense";
  }
  return "unknown";
}

namespace {

using Solver = Lobpcg<cd>;
using BlockMat = Solver::Mat;

BlockMat random_block(Eigen::Index rows, Eigen::Index cols, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  BlockMat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = {g(rng), g(rng)};
  return x;
}

/// (|k|^2 + sigma)^(-1) applied column by column.
Solver::Apply fourier_preconditioner(const GridSpec& grid, int dim, double sigma) {
  auto spectral = SpectralGrid::get(grid);
  return [spectral, grid, dim, sigma](const BlockMat& in, BlockMat& out) {
    const int n = grid.n;
    const auto& k = spectral->k();
    std::vector<cd> hat(in.rows());
    out.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      spectral->forward(in.col(c).data(), hat.data(), dim);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const double w = 1.0 / (k[i] * k[i] + k[j] * k[j] + k[l] * k[l] + sigma);
            cd* p = hat.data() + grid.index(i, j, l) * dim;
            for (int q = 0; q < dim; ++q) p[q] *= w;
          }
      spectral->backward(hat.data(), out.col(c).data(), dim);
    }
  };
}

constexpr double kEdgeResolution = 1e-3;

/// Largest block whose work space (about ten blocks) fits in `budget_mb`.
int block_cap(double budget_mb, Eigen::Index rows, std::size_t scalar_bytes) {
  const double cols = budget_mb * 1048576.0 / (10.0 * static_cast<double>(rows) *
                                               static_cast<double>(scalar_bytes));
  return static_cast<int>(std::clamp(cols, 8.0, 1e6));
}

struct BelowResult {
  Eigen::VectorXd values;
  Eigen::VectorXd residuals;
  BlockMat vectors;
  int count = 0;  // values below the threshold
  int iterations = 0;
  long applications = 0;
  int block = 0;
  bool converged = false;
  bool truncated = false;
  std::vector<double> above;  // Ritz values just above the threshold
};

/// Lowest eigenpairs of a Hermitian operator until every level below
/// `threshold` is converged and the first level above it is resolved. The
/// block doubles whenever all wanted Ritz values sit below the threshold
/// (Ritz values are upper bounds, so the count is then at least the block).
BelowResult lowest_below(const Solver::Apply& a, const Solver::Apply& precond,
                         Eigen::Index rows, double threshold, double tol,
                         int initial_block, int max_wanted, int max_iter,
                         unsigned long seed, int min_converged, int max_block,
                         BlockMat start = BlockMat()) {
  BelowResult out;
  int block = std::max({initial_block, 4, static_cast<int>(start.cols())});
  block = std::min(block, std::max(max_block, 8));
  BlockMat x0 = start.cols() > 0 ? start : random_block(rows, block, seed);
  if (x0.cols() < block) {
    BlockMat m(rows, block);
    m << x0, random_block(rows, block - x0.cols(), seed + 17);
    x0.swap(m);
  }
  int total_iter = 0;
  for (;;) {
    const int guard = std::max(4, block / 3);
    const int wanted = block - guard;
    bool grow = false;
    Solver solver(a, precond);
    solver.set_lock_tolerance(0.5 * tol);
    solver.set_max_iterations(std::max(1, max_iter - total_iter));
    auto monitor = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& r, int) {
      int c = 0;
      while (c < wanted && v[c] < threshold) ++c;
      if (c == wanted) {
        grow = true;
        return Solver::Action::Stop;
      }
      for (int j = 0; j < std::max(c, min_converged); ++j)
        if (r[j] > tol) return Solver::Action::Continue;
      // the first level above the window must be resolved and clear of it
      const double spread = r[c] * std::max(1.0, std::abs(v[c]));
      if (r[c] > kEdgeResolution || v[c] - 4.0 * spread < threshold)
        return Solver::Action::Continue;
      return Solver::Action::Stop;
    };
    auto res = solver.run(std::move(x0), monitor);
    total_iter += res.iterations;
    out.applications += res.applications;
    out.iterations = total_iter;
    out.block = block;
    if (grow && wanted < max_wanted && block < max_block && total_iter < max_iter) {
      const int next = std::min({2 * block, max_wanted + std::max(4, 2 * block / 3), max_block});
      x0.resize(rows, next);
      x0 << res.vectors, random_block(rows, next - block, seed + 31 * next);
      block = next;
      continue;
    }
    int c = 0;
    while (c < res.values.size() && res.values[c] < threshold) ++c;
    out.count = c;
    out.values = res.values;
    out.residuals = res.residuals;
    out.vectors = std::move(res.vectors);
    out.truncated = grow;
    out.converged = res.stopped && !grow;
    for (Eigen::Index j = c; j < out.values.size(); ++j) out.above.push_back(out.values[j]);
    return out;
  }
}

StateVector column_to_state(const GridSpec& grid, int dim, const cd* col) {
  StateVector s(grid, dim);
  std::copy(col, col + s.size(), s.data());
  const double nrm = s.norm();
  if (nrm > 0) s *= 1.0 / nrm;
  return s;
}

SpectrumResult dense_gap(const DiscreteOperator& h, const GapSolveOptions& opt,
                         double m, double delta) {
  SpectrumResult out;
  out.gap_mass = m;
  out.edge_delta = delta;
  out.info.method = "dense";
  out.info.tolerance = opt.tol;
  const CMat a = to_dense(h);
  CMat vecs;
  const auto vals = dense_eigenvalues(a, -m, m, opt.keep_vectors ? &vecs : nullptr);
  out.info.matvecs = static_cast<long>(a.rows());
  CMat ha;
  if (opt.keep_vectors) ha = a * vecs;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (std::abs(vals[i]) >= m - delta) {
      out.edge_values.push_back(vals[i]);
      continue;
    }
    out.eigenvalues.push_back(vals[i]);
    out.gap_mask.push_back(true);
    if (opt.keep_vectors) {
      const auto col = static_cast<Eigen::Index>(i);
      out.residual_norms.push_back((ha.col(col) - vals[i] * vecs.col(col)).norm() /
                                   vecs.col(col).norm());
      out.eigenvectors.push_back(column_to_state(h.grid(), h.internal_dim(),
                                                 vecs.col(col).data()));
    } else {
      out.residual_norms.push_back(0.0);
    }
  }
  for (double v : vals)
    if (v * v < (m - delta) * (m - delta)) ++out.folded_count;
  if (static_cast<int>(out.eigenvalues.size()) > opt.max_pairs) out.info.truncated = true;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

int count_blocks(const CMat& a) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i)
      if (a(i, j) != cd{} || a(j, i) != cd{}) parent[find(i)] = find(j);
  int blocks = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (find(i) == i) ++blocks;
  return blocks;
}

std::vector<double> dense_eigenvalues(const CMat& a, std::optional<double> lo,
                                      std::optional<double> hi, CMat* vectors) {
  if (a.rows() != a.cols()) throw DimensionMismatch("dense_eigenvalues: not square");
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i)
      if (a(i, j) != cd{} || a(j, i) != cd{}) parent[find(i)] = find(j);
  std::vector<std::vector<Eigen::Index>> blocks;
  {
    std::vector<int> slot(n, -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = find(i);
      if (slot[r] < 0) {
        slot[r] = static_cast<int>(blocks.size());
        blocks.emplace_back();
      }
      blocks[slot[r]].push_back(i);
    }
  }

  const bool ranged = lo.has_value() || hi.has_value();
  const double vl = lo.value_or(-std::numeric_limits<double>::max());
  const double vu = hi.value_or(std::numeric_limits<double>::max());
  std::vector<std::pair<double, CVec>> found;
  std::vector<double> values;
  for (const auto& idx : blocks) {
    const lapack_int m = static_cast<lapack_int>(idx.size());
    CMat sub(m, m);
    for (lapack_int j = 0; j < m; ++j)
      for (lapack_int i = 0; i < m; ++i) sub(i, j) = a(idx[i], idx[j]);
    std::vector<double> w(m);
    CMat z(vectors ? m : 1, vectors ? m : 1);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(m));
    lapack_int count = 0;
    // Values only: the two-stage reduction runs mostly in BLAS3 and is about
    // twice as fast at m ~ 6000. It has no eigenvector path.
    const auto solver = vectors ? LAPACKE_zheevr : LAPACKE_zheevr_2stage;
    const lapack_int info = solver(
        LAPACK_COL_MAJOR, vectors ? 'V' : 'N', ranged ? 'V' : 'A', 'L', m,
        reinterpret_cast<lapack_complex_double*>(sub.data()), m, vl, vu, 0, 0, 0.0,
        &count, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
        vectors ? m : 1, support.data());
    if (info != 0) throw Error("zheevr failed with info " + std::to_string(info));
    for (lapack_int q = 0; q < count; ++q) {
      if (vectors) {
        CVec full = CVec::Zero(n);
        for (lapack_int i = 0; i < m; ++i) full[idx[i]] = z(i, q);
        found.emplace_back(w[q], std::move(full));
      } else {
        values.push_back(w[q]);
      }
    }
  }
  if (vectors) {
    std::stable_sort(found.begin(), found.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    vectors->resize(n, static_cast<Eigen::Index>(found.size()));
    for (std::size_t q = 0; q < found.size(); ++q) {
      values.push_back(found[q].first);
      vectors->col(static_cast<Eigen::Index>(q)) = found[q].second;
    }
  } else {
    std::sort(values.begin(), values.end());
  }
  return values;
}

SpectrumResult gap_eigenvalues(const DiscreteOperator& h, const GapSolveOptions& opt) {
  if (!h.hermitian())
    throw UnsupportedConfiguration("gap_eigenvalues: operator is not Hermitian");
  if (!(opt.tol > 0.0)) throw ValidationError("tol must be > 0");
  if (opt.max_pairs < 1) throw ValidationError("max_pairs must be >= 1");
  const double m = opt.mass > 0.0 ? opt.mass : h.gap_mass();
  if (!(m > 0.0)) throw ValidationError("gap_eigenvalues: mass must be > 0");
  const double delta = opt.edge_fraction * m;
  const bool dense = opt.method == SolveMethod::Dense ||
                     (opt.method == SolveMethod::Auto && h.size() <= opt.dense_limit);
  if (dense) return dense_gap(h, opt, m, delta);

  SpectrumResult out;
  out.gap_mass = m;
  out.edge_delta = delta;
  out.info.method = "lobpcg";
  out.info.tolerance = opt.tol;
  const long mv0 = h.matvec_count();
  const auto rows = static_cast<Eigen::Index>(h.size());
  const double threshold = (m - delta) * (m - delta);

  Solver::Apply apply_h = [&h](const BlockMat& in, BlockMat& o) {
    o.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) h.apply(in.col(c).data(), o.col(c).data());
  };
  Solver::Apply apply_h2 = [&h](const BlockMat& in, BlockMat& o) {
    o.resize(in.rows(), in.cols());
    std::vector<cd> tmp(in.rows());
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      h.apply(in.col(c).data(), tmp.data());
      h.apply(tmp.data(), o.col(c).data());
    }
  };
  const auto precond = fourier_preconditioner(h.grid(), h.internal_dim(), m * m);

  double fold_tol = opt.tol;
  BlockMat start;
  BelowResult below;
  int iterations = 0;
  for (int attempt = 0;; ++attempt) {
    below = lowest_below(apply_h2, precond, rows, threshold, fold_tol, opt.initial_block,
                         opt.max_pairs, opt.max_iterations, opt.seed, 0,
                         block_cap(opt.memory_budget_mb, rows, sizeof(cd)), start);
    iterations += below.iterations;
    // signed levels from Rayleigh-Ritz with H on the folded window
    const int c = below.count;
    out.eigenvalues.clear();
    out.residual_norms.clear();
    out.eigenvectors.clear();
    out.gap_mask.clear();
    bool ok = true;
    if (c > 0) {
      const BlockMat v = below.vectors.leftCols(c);
      BlockMat hv;
      apply_h(v, hv);
      CMat g = v.adjoint() * hv;
      g = (0.5 * (g + g.adjoint())).eval();
      Eigen::SelfAdjointEigenSolver<CMat> es(g);
      const BlockMat psi = v * es.eigenvectors();
      const BlockMat hpsi = hv * es.eigenvectors();
      for (int j = 0; j < c; ++j) {
        const double lam = es.eigenvalues()[j];
        const double r = (hpsi.col(j) - lam * psi.col(j)).norm() / psi.col(j).norm();
        out.eigenvalues.push_back(lam);
        out.residual_norms.push_back(r);
        out.gap_mask.push_back(true);
        if (r > opt.tol * std::max(1.0, std::abs(lam))) ok = false;
        if (opt.keep_vectors)
          out.eigenvectors.push_back(
              column_to_state(h.grid(), h.internal_dim(), psi.col(j).data()));
      }
    }
    if (ok || !below.converged || attempt >= 3) {
      out.info.converged = below.converged && ok;
      break;
    }
    fold_tol *= 0.1;
    start = below.vectors;
  }
  for (double v : below.above)
    if (v < m * m) {
      const double lam = std::sqrt(std::max(v, 0.0));
      out.edge_values.push_back(lam);
    }
  out.folded_count = below.count;
  out.info.truncated = below.truncated;
  out.info.iterations = iterations;
  out.info.block_size = below.block;
  out.info.matvecs = h.matvec_count() - mv0;
  return out;
}

int count_NH(const SpectrumResult& res) {
  if (res.info.truncated)
    throw ValidationError("gap spectrum truncated: increase max_pairs");
  if (!res.info.converged) throw ConvergenceError("gap spectrum did not converge");
  int n = 0;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
    if (res.gap_mask.empty() || res.gap_mask[i]) ++n;
  return n;
}

PairingReport check_pair_symmetry(const std::vector<double>& eigenvalues, double tol,
                                  double cluster_tol) {
  PairingReport rep;
  std::vector<double> pos, neg;
  for (double v : eigenvalues) {
    if (std::abs(v) <= tol)
      ++rep.near_zero;
    else if (v > 0)
      pos.push_back(v);
    else
      neg.push_back(v);
  }
  rep.positive = static_cast<int>(pos.size());
  rep.negative = static_cast<int>(neg.size());
  std::vector<bool> used(neg.size(), false);
  for (double p : pos) {
    int best = -1;
    double err = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < neg.size(); ++q)
      if (!used[q] && std::abs(p + neg[q]) < err) {
        err = std::abs(p + neg[q]);
        best = static_cast<int>(q);
      }
    if (best < 0) {
      rep.matched = false;
      continue;
    }
    used[best] = true;
    rep.max_mismatch = std::max(rep.max_mismatch, err);
  }
  if (pos.size() != neg.size()) rep.matched = false;
  if (rep.max_mismatch > tol) rep.matched = false;

  std::sort(pos.begin(), pos.end());
  for (std::size_t i = 0; i < pos.size();) {
    std::size_t j = i + 1;
    while (j < pos.size() && pos[j] - pos[j - 1] <= cluster_tol) ++j;
    const double lo = pos[i] - cluster_tol, hi = pos[j - 1] + cluster_tol;
    const auto mirrored = std::count_if(neg.begin(), neg.end(), [&](double v) {
      return -v >= lo && -v <= hi;
    });
    if (static_cast<std::size_t>(mirrored) != j - i) rep.multiplicities_agree = false;
    i = j;
  }
  if (pos.size() != neg.size()) rep.multiplicities_agree = false;
  return rep;
}

GroundEnergies ground_energies(const SpectrumResult& res) {
  GroundEnergies g{res.gap_mass, -res.gap_mass};
  for (double v : res.eigenvalues) {
    if (v >= 0.0) g.e0_plus = std::min(g.e0_plus, v);
    if (v <= 0.0) g.e0_minus = std::max(g.e0_minus, v);
  }
  return g;
}

std::vector<EpsScanEntry> scan_epsilon(const GridSpec& grid, const MassField& mf,
                                       const DiracAlgebra& alg,
                                       const std::vector<double>& eps_list,
                                       const GapSolveOptions& opt) {
  for (double e : eps_list)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ValidationError("eps values must be finite and > 0");
  std::vector<EpsScanEntry> table;
  int streak = 0;
  for (double eps : eps_list) {
    EpsScanEntry e;
    e.eps = eps;
    try {
      const auto h = assemble_H_eps(grid, mf, alg, eps);
      e.spectrum = gap_eigenvalues(h, opt);
      e.n_h = static_cast<int>(e.spectrum.eigenvalues.size());
      e.ground = ground_energies(e.spectrum);
      e.converged = e.spectrum.info.converged;
      e.truncated = e.spectrum.info.truncated;
    } catch (const ConvergenceError& ex) {
      e.converged = false;
      e.error = ex.what();
    }
    streak = e.n_h >= 1 ? streak + 1 : 0;
    table.push_back(std::move(e));
    if (streak >= 2) break;
  }
  return table;
}

KernelProbe kernel_probe(const SpectrumResult& res, const DiscreteOperator& gamma,
                         double tol) {
  KernelProbe kp;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
    if (std::abs(res.eigenvalues[i]) <= tol) idx.push_back(i);
  kp.dim_kernel = static_cast<int>(idx.size());
  if (idx.empty()) return kp;
  if (res.eigenvectors.size() != res.eigenvalues.size())
    throw ValidationError("kernel_probe needs eigenvectors");
  const auto k = static_cast<Eigen::Index>(idx.size());
  CMat g(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const StateVector ga = gamma.apply(res.eigenvectors[idx[a]]);
    for (Eigen::Index b = 0; b < k; ++b) g(b, a) = res.eigenvectors[idx[b]].inner(ga);
  }
  g = (0.5 * (g + g.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  for (Eigen::Index i = 0; i < k; ++i)
    (es.eigenvalues()[i] > 0 ? kp.gamma_plus : kp.gamma_minus)++;
  kp.index_estimate = kp.gamma_plus - kp.gamma_minus;
  return kp;
}

std::vector<double> grading_partner_residuals(const DiscreteOperator& h,
                                              const DiscreteOperator& gamma,
                                              const SpectrumResult& res) {
  if (res.eigenvectors.size() != res.eigenvalues.size())
    throw ValidationError("grading_partner_residuals needs eigenvectors");
  std::vector<double> out;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    const StateVector g = gamma.apply(res.eigenvectors[i]);
    StateVector r = h.apply(g);
    r += cd(res.eigenvalues[i]) * g;
    out.push_back(r.norm() / res.eigenvectors[i].norm());
  }
  return out;
}

// ---------------------------------------------------------------------------

ScalarSpectrum scalar_levels(const GridSpec& grid, const std::vector<double>& potential,
                             double threshold, const ScalarSolveOptions& opt) {
  grid.validate();
  if (potential.size() != grid.num_nodes())
    throw DimensionMismatch("scalar_levels: potential has wrong size");
  auto spectral = SpectralGrid::get(grid);
  Solver::Apply a = [spectral, &potential](const BlockMat& in, BlockMat& o) {
    o.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      spectral->laplacian(in.col(c).data(), o.col(c).data(), 1);
      for (Eigen::Index i = 0; i < in.rows(); ++i)
        o(i, c) = -o(i, c) + potential[i] * in(i, c);
    }
  };
  const double vmin = *std::min_element(potential.begin(), potential.end());
  const auto precond = fourier_preconditioner(grid, 1, std::max(1.0, -vmin));
  const auto below =
      lowest_below(a, precond, static_cast<Eigen::Index>(grid.num_nodes()), threshold,
                   opt.tol, opt.initial_block, opt.max_levels, opt.max_iterations,
                   opt.seed, 1,
                   block_cap(opt.memory_budget_mb,
                             static_cast<Eigen::Index>(grid.num_nodes()), sizeof(cd)));
  ScalarSpectrum out;
  out.threshold = threshold;
  out.ground = below.values[0];
  out.count_below = below.count;
  for (int j = 0; j < below.count; ++j) out.eigenvalues.push_back(below.values[j]);
  out.converged = below.converged;
  out.truncated = below.truncated;
  out.iterations = below.iterations;
  return out;
}

}  // namespace cqsm

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/sectors.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "cqsm/lobpcg.hpp"

namespace cqsm {

CylGrid CylGrid::scaled(double factor) const {
  CylGrid g = *this;
  g.r_max *= factor;
  g.z_max *= factor;
  return g;
}

void CylGrid::validate() const {
  if (!(r_max > 0.0) || !(z_max > 0.0) || !std::isfinite(r_max) || !std::isfinite(z_max))
    throw ValidationError("cylinder grid extents must be finite and > 0");
  if (n_r < 2 || n_z < 2) throw ValidationError("cylinder grid needs n_r, n_z >= 2");
}

AxialProfile axial_from_radial(const Profile& f) {
  return [f](double r, double z) { return f.value(std::hypot(r, z)); };
}

double SectorOperator::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return (w_.array() * f.array() * g.array()).sum();
}

SectorOperator assemble_Ls(const AxialProfile& g, int l, int s, double mass,
                           const CylGrid& grid, ZSign z_sign) {
  grid.validate();
  if (s != 1 && s != -1) throw ValidationError("sector label s must be +1 or -1");
  if (!(mass > 0.0)) throw ValidationError("mass M must be > 0");
  SectorOperator op;
  op.grid_ = grid;
  op.l_ = l;
  op.s_ = s;
  op.mass_ = mass;
  op.z_sign_ = z_sign;
  const int nr = grid.n_r, nz = grid.n_z;
  const double dr = grid.dr(), dz = grid.dz();
  const double zs = z_sign == ZSign::Minus ? 1.0 : -1.0;
  const auto n = static_cast<Eigen::Index>(grid.size());
  op.w_.resize(n);
  std::vector<Eigen::Triplet<double>> ta, tb;
  for (int i = 0; i < nr; ++i) {
    const double r = grid.r(i);
    const double rp = r + 0.5 * dr, rm = r - 0.5 * dr;  // rm = 0 on the first cell
    const double cp = rp / (r * dr * dr), cm = rm / (r * dr * dr);
    for (int j = 0; j < nz; ++j) {
      const auto p = static_cast<Eigen::Index>(grid.index(i, j));
      const double z = grid.z(j);
      op.w_[p] = grid.weight(i);
      double diag = cp + cm + zs * 2.0 / (dz * dz) + static_cast<double>(l) * l / (r * r);
      // Dirichlet walls sit on the cell faces r_max and +-z_max: the ghost
      // value mirrors the boundary cell with opposite sign.
      if (i + 1 == nr) diag += cp;
      if (j == 0 || j + 1 == nz) diag += zs / (dz * dz);
      const double dcos = (std::cos(g(r, z + dz)) - std::cos(g(r, z - dz))) / (2.0 * dz);
      diag += s * mass * dcos;
      ta.emplace_back(p, p, diag);
      tb.emplace_back(p, p, diag);
      if (i + 1 < nr) {
        const auto q = static_cast<Eigen::Index>(grid.index(i + 1, j));
        ta.emplace_back(p, q, -cp);
        // W^(1/2) A W^(-1/2) coupling, symmetric by construction
        const double sym = -rp / (dr * dr * std::sqrt(r * grid.r(i + 1)));
        tb.emplace_back(p, q, sym);
        tb.emplace_back(q, p, sym);
      }
      if (i > 0) ta.emplace_back(p, static_cast<Eigen::Index>(grid.index(i - 1, j)), -cm);
      if (j + 1 < nz) {
        const auto q = static_cast<Eigen::Index>(grid.index(i, j + 1));
        ta.emplace_back(p, q, -zs / (dz * dz));
        ta.emplace_back(q, p, -zs / (dz * dz));
        tb.emplace_back(p, q, -zs / (dz * dz));
        tb.emplace_back(q, p, -zs / (dz * dz));
      }
    }
  }
  op.a_.resize(n, n);
  op.a_.setFromTriplets(ta.begin(), ta.end());
  op.b_.resize(n, n);
  op.b_.setFromTriplets(tb.begin(), tb.end());
  return op;
}

double weighted_symmetry_residual(const SectorOperator& op, const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& g) {
  const double a = op.inner(f, op.apply(g));
  const double b = op.inner(op.apply(f), g);
  return std::abs(a - b) / std::sqrt(op.inner(f, f) * op.inner(g, g));
}

SectorGround sector_ground(const SectorOperator& op, double tol) {
  using Solver = Lobpcg<double>;
  const auto& b = op.symmetric();
  // Gershgorin lower bound; B - sigma is then positive definite
  double lower = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < b.outerSize(); ++k) {
    double d = 0.0, off = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, k); it; ++it)
      if (it.row() == it.col())
        d += it.value();
      else
        off += std::abs(it.value());
    lower = std::min(lower, d - off);
  }
  Eigen::SparseMatrix<double> shifted = b;
  for (Eigen::Index k = 0; k < b.rows(); ++k) shifted.coeffRef(k, k) -= lower - 1.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw Error("sector_ground: factorization failed");

  Solver solver([&b](const Solver::Mat& in, Solver::Mat& out) { out = b * in; },
                [&ldlt](const Solver::Mat& in, Solver::Mat& out) { out = ldlt.solve(in); });
  solver.set_max_iterations(500);
  solver.set_lock_tolerance(0.5 * tol);
  // smooth positive start vectors (the ground state has no nodes)
  const CylGrid& g = op.grid();
  Solver::Mat x(b.rows(), 4);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_z; ++j) {
      const auto p = static_cast<Eigen::Index>(g.index(i, j));
      const double u = g.r(i) / g.r_max, v = (g.z(j) + g.z_max) / (2.0 * g.z_max);
      const double w = std::sqrt(g.weight(i));
      x(p, 0) = w * std::sin(kPi * v) * (1.0 - u);
      x(p, 1) = w * std::sin(2.0 * kPi * v) * (1.0 - u);
      x(p, 2) = w * std::sin(kPi * v) * u * (1.0 - u);
      x(p, 3) = w * std::sin(3.0 * kPi * v) * (1.0 - u * u);
    }
  auto res = solver.run(std::move(x), [tol](const Eigen::VectorXd&, const Eigen::VectorXd& r,
                                           int) {
    return r[0] <= tol ? Solver::Action::Stop : Solver::Action::Continue;
  });
  SectorGround out;
  out.e0 = res.values[0];
  out.residual = res.residuals[0];
  out.iterations = res.iterations;
  out.converged = res.stopped;
  return out;
}

std::vector<double> sector_levels_dense(const SectorOperator& op, int count) {
  const Eigen::MatrixXd b(op.symmetric());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(count, b.rows()); ++i)
    out.push_back(es.eigenvalues()[i]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Pointwise internal matrix applied at every node.
StateVector apply_internal(const StateVector& psi, const CMat& m) {
  StateVector out(psi.grid(), psi.internal_dim());
  const int d = psi.internal_dim();
  for (std::size_t p = 0; p < psi.grid().num_nodes(); ++p)
    Eigen::Map<CVec>(out.data() + p * d, d) = m * Eigen::Map<const CVec>(psi.data() + p * d, d);
  return out;
}

CMat internal_generator(const DiracAlgebra& alg, const IsoSpinTriple& triple, int m) {
  const int dk = triple.dim_k;
  return 0.5 * kron(alg.spin(2), CMat::Identity(dk, dk)) +
         0.5 * m * kron(CMat::Identity(4, 4), triple.t[2]);
}

/// exp(-i theta A) for Hermitian A.
CMat unitary_exp(const CMat& a, double theta) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  CVec phase(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    phase[i] = std::exp(-kI * theta * es.eigenvalues()[i]);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

/// Node receiving the value of node p under the quarter turn (x, y) -> (-y, x).
std::size_t turn_destination(const GridSpec& g, std::size_t p) {
  const int n = g.n;
  const int k = static_cast<int>(p % n);
  const int j = static_cast<int>((p / n) % n);
  const int i = static_cast<int>(p / (static_cast<std::size_t>(n) * n));
  return g.index((n - j) % n, i, k);
}

double distance_to_class(double kappa, double cls) {
  const double d = std::fmod(kappa - cls, 4.0);
  const double r = d < 0 ? d + 4.0 : d;
  return std::min(r, 4.0 - r);
}

}  // namespace

StateVector quarter_turn(const StateVector& psi, const DiracAlgebra& alg,
                         const IsoSpinTriple& triple, int m) {
  const GridSpec& g = psi.grid();
  const int d = psi.internal_dim();
  if (d != 4 * triple.dim_k) throw DimensionMismatch("quarter_turn: internal dimension");
  const CMat u = unitary_exp(internal_generator(alg, triple, m), 0.5 * kPi);
  StateVector out(g, d);
  for (std::size_t p = 0; p < g.num_nodes(); ++p)
    Eigen::Map<CVec>(out.data() + turn_destination(g, p) * d, d) =
        u * Eigen::Map<const CVec>(psi.data() + p * d, d);
  return out;
}

std::vector<SectorLabel> classify_by_k3(SpectrumResult& res, const DiscreteOperator& k3,
                                        const DiracAlgebra& alg,
                                        const IsoSpinTriple& triple, int m, double tol,
                                        double cluster_tol) {
  if (k3.kind() != OperatorKind::K3) throw ValidationError("classify_by_k3 needs K3");
  auto& vecs = res.eigenvectors;
  if (vecs.size() != res.eigenvalues.size())
    throw ValidationError("classify_by_k3 needs eigenvectors");
  const int dk = triple.dim_k;
  const CMat sigma3 = kron(alg.spin(2), CMat::Identity(dk, dk));
  const CMat t3 = kron(CMat::Identity(4, 4), triple.t[2]);

  // rediagonalize K3 inside clusters of (near) degenerate levels
  for (std::size_t i = 0; i < vecs.size();) {
    std::size_t j = i + 1;
    while (j < vecs.size() &&
           res.eigenvalues[j] - res.eigenvalues[j - 1] <= cluster_tol)
      ++j;
    if (j - i > 1) {
      const auto c = static_cast<Eigen::Index>(j - i);
      std::vector<StateVector> kv;
      for (std::size_t a = i; a < j; ++a) kv.push_back(k3.apply(vecs[a]));
      CMat g(c, c);
      for (Eigen::Index a = 0; a < c; ++a)
        for (Eigen::Index b = 0; b < c; ++b) g(a, b) = vecs[i + a].inner(kv[b]);
      g = (0.5 * (g + g.adjoint())).eval();
      Eigen::SelfAdjointEigenSolver<CMat> es(g);
      std::vector<StateVector> rotated;
      for (Eigen::Index b = 0; b < c; ++b) {
        StateVector s(vecs[i].grid(), vecs[i].internal_dim());
        for (Eigen::Index a = 0; a < c; ++a) s.vec() += es.eigenvectors()(a, b) * vecs[i + a].vec();
        rotated.push_back(std::move(s));
      }
      for (Eigen::Index b = 0; b < c; ++b) vecs[i + b] = std::move(rotated[b]);
    }
    i = j;
  }

  std::vector<SectorLabel> labels;
  const double offset = m % 2 == 0 ? 0.5 : 0.0;
  for (const auto& psi : vecs) {
    SectorLabel lab;
    const double nn = psi.inner(psi).real();
    const StateVector kpsi = k3.apply(psi);
    lab.k3_mean = psi.inner(kpsi).real() / nn;
    lab.k3_variance = std::max(0.0, kpsi.inner(kpsi).real() / nn - lab.k3_mean * lab.k3_mean);
    const double sig = psi.inner(apply_internal(psi, sigma3)).real();
    const double tt = psi.inner(apply_internal(psi, t3)).real();
    lab.s = sig >= 0.0 ? 1 : -1;
    lab.t = tt >= 0.0 ? 1 : -1;
    lab.k3_value = std::round(lab.k3_mean - offset) + offset;
    lab.l = static_cast<int>(std::lround(lab.k3_value - 0.5 * lab.s - 0.5 * m * lab.t));
    lab.mixed = lab.k3_variance > tol;
    labels.push_back(lab);
  }
  return labels;
}

SectorEquivalenceReport sector_equivalence_check(const GridSpec& grid, const MassField& mf,
                                                 const DiracAlgebra& alg, int m,
                                                 double tol) {
  grid.validate();
  if (grid.n > 9) throw ValidationError("sector_equivalence_check needs n <= 9");
  mf.validate();
  SectorEquivalenceReport rep;
  const auto h = assemble_H(grid, mf, alg);
  const auto k3 = assemble_K3(grid, alg, mf.triple, m);
  const CMat hd = to_dense(h);
  const int d = h.internal_dim();
  const std::size_t nodes = grid.num_nodes();
  const auto n = static_cast<Eigen::Index>(h.size());
  const CMat u = unitary_exp(internal_generator(alg, mf.triple, m), 0.5 * kPi);

  // orbits of the quarter turn; the seam column x = y = -L is fixed
  std::vector<std::vector<std::size_t>> orbits;
  std::vector<bool> seen(nodes, false);
  for (std::size_t p = 0; p < nodes; ++p) {
    if (seen[p]) continue;
    std::vector<std::size_t> orb;
    for (std::size_t q = p; !seen[q]; q = turn_destination(grid, q)) {
      seen[q] = true;
      orb.push_back(q);
    }
    orbits.push_back(std::move(orb));
  }

  // symmetry-adapted basis: range of sum_j lambda^(-j) R^j on each orbit
  const double offset = m % 2 == 0 ? 0.5 : 0.0;
  std::vector<Eigen::SparseMatrix<cd>> q(4);
  std::vector<CMat> u_pow(4);
  u_pow[0] = CMat::Identity(d, d);
  for (int j = 1; j < 4; ++j) u_pow[j] = u * u_pow[j - 1];
  for (int c = 0; c < 4; ++c) {
    const double kappa = offset + c;
    const cd lambda = std::exp(-kI * 0.5 * kPi * kappa);
    std::vector<Eigen::Triplet<cd>> trip;
    Eigen::Index col = 0;
    for (const auto& orb : orbits) {
      const auto len = static_cast<Eigen::Index>(orb.size());
      CMat w = CMat::Zero(len * d, d);
      for (int j = 0; j < 4; ++j)
        w.middleRows((j % len) * d, d) += std::pow(lambda, -j) * u_pow[j];
      // columns have norm O(1), so an absolute pivot cut detects the rank
      Eigen::ColPivHouseholderQR<CMat> qr(w);
      Eigen::Index rank = 0;
      while (rank < w.cols() && std::abs(qr.matrixR()(rank, rank)) > 1e-8) ++rank;
      const CMat basis = CMat(qr.householderQ()).leftCols(rank);
      for (Eigen::Index e = 0; e < basis.cols(); ++e, ++col)
        for (Eigen::Index k = 0; k < basis.rows(); ++k)
          if (std::abs(basis(k, e)) > 1e-15)
            trip.emplace_back(static_cast<Eigen::Index>(orb[k / d] * d + k % d), col,
                              basis(k, e));
    }
    q[c].resize(n, col);
    q[c].setFromTriplets(trip.begin(), trip.end());
  }

  std::vector<CMat> hq(4);
  for (int c = 0; c < 4; ++c) hq[c] = hd * q[c];
  std::vector<double> union_values;
  for (int c = 0; c < 4; ++c) {
    for (int c2 = 0; c2 < 4; ++c2) {
      const CMat block = CMat(q[c2].adjoint()) * hq[c];
      if (c2 != c) {
        rep.off_block_residual = std::max(rep.off_block_residual, max_abs(block));
        continue;
      }
      SectorBlock sb;
      sb.k3_class = offset + c;
      sb.dim = static_cast<int>(block.rows());
      CMat vecs;
      sb.eigenvalues = dense_eigenvalues(block, {}, {}, &vecs);
      union_values.insert(union_values.end(), sb.eigenvalues.begin(), sb.eigenvalues.end());
      // grid K3 mean of each block eigenvector, compared with the class
      const CMat full = CMat(q[c] * vecs);
      for (Eigen::Index k = 0; k < full.cols(); ++k) {
        std::vector<cd> kv(static_cast<std::size_t>(n));
        k3.apply(full.col(k).data(), kv.data());
        const cd mean = full.col(k).dot(Eigen::Map<const CVec>(kv.data(), n));
        if (distance_to_class(mean.real() / full.col(k).squaredNorm(), sb.k3_class) > 0.5)
          ++rep.k3_class_disagreements;
      }
      rep.blocks.push_back(std::move(sb));
    }
  }
  std::sort(union_values.begin(), union_values.end());
  const auto full = dense_eigenvalues(hd);
  if (full.size() != union_values.size()) {
    rep.spectrum_mismatch = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 0; i < full.size(); ++i)
      rep.spectrum_mismatch = std::max(rep.spectrum_mismatch, std::abs(full[i] - union_values[i]));
  }

  // |[H, K3]|_F / |H|_F with the grid K3, column by column
  double comm2 = 0.0;
  std::vector<cd> e(static_cast<std::size_t>(n), cd{}), a(e.size()), b(e.size()), t(e.size());
  for (Eigen::Index col = 0; col < n; ++col) {
    e[col] = 1.0;
    k3.apply(e.data(), t.data());
    h.apply(t.data(), a.data());
    h.apply(e.data(), t.data());
    k3.apply(t.data(), b.data());
    e[col] = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) comm2 += std::norm(a[r] - b[r]);
  }
  rep.k3_commutator = std::sqrt(comm2) / hd.norm();
  rep.passed = rep.off_block_residual <= tol && rep.spectrum_mismatch <= tol;
  return rep;
}

std::vector<SectorScanEntry> sector_epsilon_scan(const AxialProfile& g, int l, int s, int t,
                                                 double mass,
                                                 const std::vector<double>& eps_list,
                                                 const CylGrid& grid, double tol,
                                                 ZSign z_sign) {
  for (double e : eps_list)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ValidationError("eps values must be finite and > 0");
  std::vector<SectorScanEntry> out;
  for (double eps : eps_list) {
    SectorScanEntry row;
    row.l = l;
    row.s = s;
    row.t = t;
    row.eps = eps;
    try {
      const AxialProfile ge = [g, eps](double r, double z) { return g(eps * r, eps * z); };
      const auto op = assemble_Ls(ge, l, s, mass / eps, grid.scaled(1.0 / eps), z_sign);
      const auto gr = sector_ground(op, tol);
      row.e0 = gr.e0;
      row.converged = gr.converged;
    } catch (const Error& ex) {
      row.error = ex.what();
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace cqsm

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cqsm {

/// Locally optimal block preconditioned conjugate gradient for the lowest
/// eigenpairs of a Hermitian operator. The basis [X, W, P] is kept
/// orthonormal explicitly (two passes of classical Gram-Schmidt followed by
/// an SVQB step that drops numerically dependent directions), so the
/// Rayleigh-Ritz step is a standard Hermitian eigenproblem.
template <typename Scalar>
class Lobpcg {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RealVec = Eigen::VectorXd;
  using Apply = std::function<void(const Mat& in, Mat& out)>;

  enum class Action { Continue, Stop };
  /// Called once per iteration with the current Ritz values and relative
  /// residual norms |A x - mu x| / max(1, |mu|).
  using Monitor =
      std::function<Action(const RealVec& values, const RealVec& residuals, int iter)>;

  struct Result {
    RealVec values;
    RealVec residuals;
    Mat vectors;
    int iterations = 0;
    long applications = 0;
    bool stopped = false;  // monitor asked to stop (as opposed to the cap)
  };

  Lobpcg(Apply a, Apply precond) : a_(std::move(a)), t_(std::move(precond)) {}

  /// Columns whose residual is below `tol` get no new search directions.
  void set_lock_tolerance(double tol) { lock_tol_ = tol; }
  void set_max_iterations(int n) { max_iter_ = n; }

  Result run(Mat x, const Monitor& monitor) {
    Result out;
    const Eigen::Index k = x.cols();
    orthonormalize(x, nullptr);
    if (x.cols() < k) x = complete(x, k);
    Mat ax(x.rows(), k);
    apply(x, ax, out);

    {
      Mat g = x.adjoint() * ax;
      hermitize(g);
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      x = x * es.eigenvectors();
      ax = ax * es.eigenvectors();
      out.values = es.eigenvalues();
    }

    Mat p, ap;
    std::vector<bool> has_p;
    for (int it = 0;; ++it) {
      Mat r = ax - x * out.values.template cast<Scalar>().asDiagonal();
      out.residuals.resize(k);
      for (Eigen::Index j = 0; j < k; ++j)
        out.residuals[j] = r.col(j).norm() / std::max(1.0, std::abs(out.values[j]));
      out.iterations = it;
      if (monitor(out.values, out.residuals, it) == Action::Stop) {
        out.stopped = true;
        break;
      }
      if (it >= max_iter_) break;

      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < k; ++j)
        if (out.residuals[j] > lock_tol_) active.push_back(j);
      if (active.empty()) break;

      Mat w(x.rows(), static_cast<Eigen::Index>(active.size()));
      for (std::size_t q = 0; q < active.size(); ++q) w.col(q) = r.col(active[q]);
      r.resize(0, 0);
      if (t_) {
        Mat tw(w.rows(), w.cols());
        t_(w, tw);
        w.swap(tw);
      }
      project_out(w, x);
      orthonormalize(w, nullptr);
      Mat aw(w.rows(), w.cols());
      if (w.cols() > 0) apply(w, aw, out);

      Mat pa, apa;
      if (p.cols() > 0) {
        std::vector<Eigen::Index> cols;
        for (auto j : active)
          if (has_p[j]) cols.push_back(j);
        pa.resize(x.rows(), static_cast<Eigen::Index>(cols.size()));
        apa.resize(x.rows(), pa.cols());
        for (std::size_t q = 0; q < cols.size(); ++q) {
          pa.col(q) = p.col(cols[q]);
          apa.col(q) = ap.col(cols[q]);
        }
        // P is orthogonalized against [X, W]; A P follows by linearity.
        for (int pass = 0; pass < 2; ++pass) {
          const Mat cx = x.adjoint() * pa;
          pa.noalias() -= x * cx;
          apa.noalias() -= ax * cx;
          if (w.cols() > 0) {
            const Mat cw = w.adjoint() * pa;
            pa.noalias() -= w * cw;
            apa.noalias() -= aw * cw;
          }
        }
        orthonormalize(pa, &apa);
      }
      p.resize(0, 0);
      ap.resize(0, 0);

      const Eigen::Index nw = w.cols(), np = pa.cols();
      const Eigen::Index m = k + nw + np;
      Mat q(x.rows(), m), aq(x.rows(), m);
      q << x, w, pa;
      aq << ax, aw, apa;
      // peak memory is about ten blocks: drop the pieces now held in q, aq
      x.resize(0, 0);
      w.resize(0, 0);
      pa.resize(0, 0);
      ax.resize(0, 0);
      aw.resize(0, 0);
      apa.resize(0, 0);
      Mat g = q.adjoint() * aq;
      hermitize(g);
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      const Mat y = es.eigenvectors().leftCols(k);
      out.values = es.eigenvalues().head(k);

      const Mat ywp = y.bottomRows(nw + np);
      p = q.rightCols(nw + np) * ywp;
      ap = aq.rightCols(nw + np) * ywp;
      has_p.assign(static_cast<std::size_t>(k), nw + np > 0);
      x = q * y;
      ax = aq * y;
    }
    out.vectors = std::move(x);
    return out;
  }

 private:
  void apply(const Mat& in, Mat& out, Result& res) {
    a_(in, out);
    res.applications += in.cols();
  }

  static void hermitize(Mat& g) { g = (0.5 * (g + g.adjoint())).eval(); }

  static void project_out(Mat& w, const Mat& x) {
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= x * (x.adjoint() * w);
  }

  /// SVQB: w <- w V diag(d)^(-1/2) restricted to the well-conditioned part.
  /// Applies the same transform to `aw` when given.
  static void orthonormalize(Mat& w, Mat* aw) {
    if (w.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
      Mat g = w.adjoint() * w;
      hermitize(g);
      Eigen::VectorXd scale(g.rows());
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double d = std::real(g(i, i));
        scale[i] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
      }
      const auto sd = scale.template cast<Scalar>().asDiagonal();
      const Mat gs = sd * g * sd;
      Eigen::SelfAdjointEigenSolver<Mat> es(gs);
      const double top = es.eigenvalues().maxCoeff();
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < gs.rows(); ++i)
        if (es.eigenvalues()[i] > 1e-12 * std::max(top, 1e-300)) keep.push_back(i);
      Mat t(g.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t q = 0; q < keep.size(); ++q)
        t.col(q) = scale.template cast<Scalar>().asDiagonal() *
                   es.eigenvectors().col(keep[q]) /
                   static_cast<Scalar>(std::sqrt(es.eigenvalues()[keep[q]]));
      w = (w * t).eval();
      if (aw) *aw = ((*aw) * t).eval();
    }
  }

  /// Pads an orthonormal block with deterministic extra directions.
  static Mat complete(const Mat& x, Eigen::Index k) {
    Mat out = x;
    Eigen::Index seed = 0;
    while (out.cols() < k) {
      Mat extra = Mat::Zero(x.rows(), k - out.cols());
      for (Eigen::Index j = 0; j < extra.cols(); ++j)
        extra((seed++ * 7919 + j * 104729) % x.rows(), j) = Scalar(1);
      project_out(extra, out);
      orthonormalize(extra, nullptr);
      Mat merged(x.rows(), out.cols() + extra.cols());
      merged << out, extra;
      out.swap(merged);
    }
    return out;
  }

  Apply a_;
  Apply t_;
  double lock_tol_ = 0.0;
  int max_iter_ = 1000;
};

}  // namespace cqsm

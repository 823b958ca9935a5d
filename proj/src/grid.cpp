// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "cqsm/grid.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <fftw3.h>

namespace cqsm {

Vec3 GridSpec::node(std::size_t idx) const {
  const std::size_t nn = static_cast<std::size_t>(n);
  const int k = static_cast<int>(idx % nn);
  const int j = static_cast<int>((idx / nn) % nn);
  const int i = static_cast<int>(idx / (nn * nn));
  return {coord(i), coord(j), coord(k)};
}

double GridSpec::wavenumber(int m) const {
  const int f = m <= n / 2 ? m : m - n;
  return kPi * f / half_width;
}

void GridSpec::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("grid half_width L must be finite and > 0");
  if (n % 2 == 0) throw ValidationError("n must be odd");
  if (n < 5) throw ValidationError("n must be >= 5");
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.n == b.n && a.half_width == b.half_width;
}

// ---------------------------------------------------------------------------

struct SpectralGrid::Plans {
  int dim = 0;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralGrid::SpectralGrid(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  k_.resize(grid_.n);
  for (int m = 0; m < grid_.n; ++m) k_[m] = grid_.wavenumber(m);
}

SpectralGrid::~SpectralGrid() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  plans_.clear();
}

SpectralGrid::Plans& SpectralGrid::plans(int dim) const {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& p : plans_)
    if (p->dim == dim) return *p;
  auto p = std::make_unique<Plans>();
  p->dim = dim;
  const int n = grid_.n;
  const int dims[3] = {n, n, n};
  const std::size_t total = grid_.num_nodes() * dim;
  auto* a = fftw_alloc_complex(total);
  auto* b = fftw_alloc_complex(total);
  {
    std::lock_guard<std::mutex> g(fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p->fwd = fftw_plan_many_dft(3, dims, dim, a, nullptr, dim, 1, b, nullptr,
                                dim, 1, FFTW_FORWARD, flags);
    p->bwd = fftw_plan_many_dft(3, dims, dim, a, nullptr, dim, 1, b, nullptr,
                                dim, 1, FFTW_BACKWARD, flags);
  }
  fftw_free(a);
  fftw_free(b);
  if (!p->fwd || !p->bwd) throw Error("FFTW planning failed");
  plans_.push_back(std::move(p));
  return *plans_.back();
}

void SpectralGrid::forward(const cd* in, cd* out, int dim) const {
  auto& p = plans(dim);
  fftw_execute_dft(p.fwd,
                   reinterpret_cast<fftw_complex*>(const_cast<cd*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void SpectralGrid::backward(const cd* in, cd* out, int dim) const {
  auto& p = plans(dim);
  fftw_execute_dft(p.bwd,
                   reinterpret_cast<fftw_complex*>(const_cast<cd*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / static_cast<double>(grid_.num_nodes());
  const std::size_t total = grid_.num_nodes() * dim;
  for (std::size_t i = 0; i < total; ++i) out[i] *= s;
}

void SpectralGrid::derivative(const cd* in, cd* out, int dim, int axis) const {
  const int n = grid_.n;
  const std::size_t total = grid_.num_nodes() * dim;
  std::vector<cd> work(total);
  forward(in, work.data(), dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const int m = axis == 0 ? i : (axis == 1 ? j : l);
        const cd f = kI * k_[m];
        cd* w = work.data() + grid_.index(i, j, l) * dim;
        for (int c = 0; c < dim; ++c) w[c] *= f;
      }
  backward(work.data(), out, dim);
}

void SpectralGrid::laplacian(const cd* in, cd* out, int dim) const {
  const int n = grid_.n;
  const std::size_t total = grid_.num_nodes() * dim;
  std::vector<cd> work(total);
  forward(in, work.data(), dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double k2 = k_[i] * k_[i] + k_[j] * k_[j] + k_[l] * k_[l];
        cd* w = work.data() + grid_.index(i, j, l) * dim;
        for (int c = 0; c < dim; ++c) w[c] *= -k2;
      }
  backward(work.data(), out, dim);
}

std::shared_ptr<const SpectralGrid> SpectralGrid::get(const GridSpec& grid) {
  static std::mutex m;
  static std::map<std::pair<int, double>, std::weak_ptr<const SpectralGrid>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_pair(grid.n, grid.half_width);
  if (auto it = cache.find(key); it != cache.end())
    if (auto sp = it->second.lock()) return sp;
  auto sp = std::make_shared<const SpectralGrid>(grid);
  cache[key] = sp;
  return sp;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(const GridSpec& grid, int internal_dim)
    : grid_(grid), dim_(internal_dim), data_(grid.num_nodes() * internal_dim) {
  if (internal_dim < 1) throw ValidationError("internal dimension must be >= 1");
}

double StateVector::norm() const {
  return std::sqrt(grid_.cell_volume()) * vec().norm();
}

cd StateVector::inner(const StateVector& other) const {
  if (other.size() != size())
    throw DimensionMismatch("StateVector::inner: size mismatch");
  return grid_.cell_volume() * vec().dot(other.vec());
}

bool StateVector::finite() const {
  for (const auto& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

StateVector& StateVector::operator+=(const StateVector& o) {
  if (o.size() != size()) throw DimensionMismatch("StateVector: size mismatch");
  vec() += o.vec();
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
  if (o.size() != size()) throw DimensionMismatch("StateVector: size mismatch");
  vec() -= o.vec();
  return *this;
}

StateVector& StateVector::operator*=(cd s) {
  vec() *= s;
  return *this;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(cd s, StateVector a) { return a *= s; }

StateVector StateVector::random(const GridSpec& grid, int internal_dim,
                                unsigned long seed) {
  StateVector v(grid, internal_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& z : v.data_) z = {g(rng), g(rng)};
  return v;
}

StateVector StateVector::gaussian(const GridSpec& grid, int internal_dim,
                                  const Vec3& center, double width,
                                  const CVec& internal) {
  if (internal.size() != internal_dim)
    throw DimensionMismatch("gaussian: internal vector has wrong length");
  StateVector v(grid, internal_dim);
  for (std::size_t p = 0; p < grid.num_nodes(); ++p) {
    const double r2 = (grid.node(p) - center).squaredNorm();
    const double g = std::exp(-r2 / (2.0 * width * width));
    for (int c = 0; c < internal_dim; ++c) v(p, c) = g * internal[c];
  }
  return v;
}

}  // namespace cqsm

// Copyright 2026 The cqsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "cqsm/common.hpp"

namespace cqsm {

/// Periodic box [-L, L)^3 sampled with n (odd) points per axis at
/// x_i = -L + i h, h = 2L / n. For odd n no node lies on a coordinate plane;
/// the node set is symmetric under x -> -x and quarter turns about any axis
/// (modulo the period).
struct GridSpec {
  double half_width = 8.0;
  int n = 31;

  double spacing() const { return 2.0 * half_width / n; }
  std::size_t num_nodes() const {
    return static_cast<std::size_t>(n) * n * n;
  }
  double coord(int i) const { return -half_width + i * spacing(); }
  Vec3 node(std::size_t idx) const;
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }
  /// Angular wavenumber of FFT bin `m` (standard FFT ordering).
  double wavenumber(int m) const;
  double cell_volume() const { return spacing() * spacing() * spacing(); }
  void validate() const;
};

bool operator==(const GridSpec& a, const GridSpec& b);

/// FFT-based spectral differentiation on a GridSpec for fields with `dim`
/// interleaved components per node. Plans are created on first use.
class SpectralGrid {
 public:
  explicit SpectralGrid(const GridSpec& grid);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& k() const { return k_; }

  /// Unnormalized forward transform of `dim` interleaved fields.
  void forward(const cd* in, cd* out, int dim) const;
  /// Inverse transform including the 1/n^3 normalization.
  void backward(const cd* in, cd* out, int dim) const;

  /// D_axis applied to each of `dim` interleaved fields.
  void derivative(const cd* in, cd* out, int dim, int axis) const;
  /// Spectral Laplacian.
  void laplacian(const cd* in, cd* out, int dim) const;

  /// Shared instance per grid (cached by value).
  static std::shared_ptr<const SpectralGrid> get(const GridSpec& grid);

 private:
  struct Plans;
  Plans& plans(int dim) const;

  GridSpec grid_;
  std::vector<double> k_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<Plans>> plans_;
};

/// Discrete state psi(node, component) with component = spinor * dim_k + iso.
/// Norms carry the grid weight h^3.
class StateVector {
 public:
  StateVector() = default;
  StateVector(const GridSpec& grid, int internal_dim);

  const GridSpec& grid() const { return grid_; }
  int internal_dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  cd* data() { return data_.data(); }
  const cd* data() const { return data_.data(); }
  std::span<cd> span() { return data_; }
  std::span<const cd> span() const { return data_; }
  cd& operator()(std::size_t node, int c) { return data_[node * dim_ + c]; }
  cd operator()(std::size_t node, int c) const { return data_[node * dim_ + c]; }

  Eigen::Map<CVec> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<const CVec> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  double norm() const;
  cd inner(const StateVector& other) const;
  bool finite() const;

  StateVector& operator+=(const StateVector& o);
  StateVector& operator-=(const StateVector& o);
  StateVector& operator*=(cd s);

  /// Deterministic complex Gaussian entries.
  static StateVector random(const GridSpec& grid, int internal_dim,
                            unsigned long seed);
  /// exp(-|x - c|^2 / (2 w^2)) times a fixed internal vector.
  static StateVector gaussian(const GridSpec& grid, int internal_dim,
                              const Vec3& center, double width,
                              const CVec& internal);

 private:
  GridSpec grid_;
  int dim_ = 0;
  std::vector<cd> data_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(cd s, StateVector a);

}  // namespace cqsm

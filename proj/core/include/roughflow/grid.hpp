#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "roughflow/errors.hpp"

namespace roughflow::fpe {

/// Axis-aligned uniform cell grid on center + [-L, L]^d with spacing h.
/// Cell centers sit at center[k] - L + (i + 1/2) h, so no sample ever lands
/// exactly on a coordinate hyperplane of the box center.
struct GridSpec {
  int d = 2;
  double half_width = 1.0;  ///< L
  double spacing = 0.1;     ///< h
  double dt = 0.0;          ///< explicit step; 0 requests the stability-bound step
  double horizon = 1.0;     ///< T
  std::array<double, 3> center{0.0, 0.0, 0.0};

  int cells_per_dim() const {
    return static_cast<int>(2.0 * half_width / spacing + 0.5);
  }
  std::int64_t cell_count() const {
    std::int64_t n = cells_per_dim();
    std::int64_t total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    return total;
  }
  double coord(int axis, int idx) const {
    return center[static_cast<std::size_t>(axis)] - half_width +
           (static_cast<double>(idx) + 0.5) * spacing;
  }
  double lo(int axis) const { return center[static_cast<std::size_t>(axis)] - half_width; }
  double hi(int axis) const { return center[static_cast<std::size_t>(axis)] + half_width; }

  /// Row-major strides: axis 0 is the fastest index.
  std::int64_t stride(int axis) const {
    std::int64_t s = 1;
    for (int k = 0; k < axis; ++k) s *= cells_per_dim();
    return s;
  }

  void unflatten(std::int64_t flat, int* idx) const {
    int n = cells_per_dim();
    for (int k = 0; k < d; ++k) {
      idx[k] = static_cast<int>(flat % n);
      flat /= n;
    }
  }
  std::int64_t flatten(const int* idx) const {
    int n = cells_per_dim();
    std::int64_t flat = 0;
    for (int k = d - 1; k >= 0; --k) flat = flat * n + idx[k];
    return flat;
  }

  bool same_layout(const GridSpec& other) const {
    if (d != other.d || cells_per_dim() != other.cells_per_dim()) return false;
    if (spacing != other.spacing || half_width != other.half_width) return false;
    for (int k = 0; k < d; ++k) {
      if (center[static_cast<std::size_t>(k)] != other.center[static_cast<std::size_t>(k)])
        return false;
    }
    return true;
  }
};

/// Scalar samples on the cells of a GridSpec at one instant.
struct GridFunction {
  GridSpec grid;
  double time = 0.0;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& g, double t = 0.0)
      : grid(g), time(t), values(static_cast<std::size_t>(g.cell_count()), 0.0) {}

  double mass() const;     ///< sum of values times h^d
  double max_value() const;
  double min_value() const;
  double max_abs() const;
  bool all_finite() const;

  /// Multiply so that mass() == 1. No-op on zero mass.
  void normalize_mass();
};

/// Fills a grid function by sampling fn(x) at cell centers.
GridFunction sample_on_grid(const GridSpec& grid, const std::function<double(const double*)>& fn,
                            double time = 0.0);

/// Isotropic Gaussian density with given variance per axis, mass-normalized
/// on the grid.
GridFunction gaussian_density(const GridSpec& grid, double variance,
                              const std::array<double, 3>& mean = {0.0, 0.0, 0.0});

/// Plain-text table: one row per cell with index, coordinates, value.
void write_csv(const GridFunction& f, const std::string& path);

/// Binary snapshot with a fixed 64-byte header:
///   bytes  0..3   magic "FPE1"
///   bytes  4..7   format version (u32, little endian) = 1
///   bytes  8..11  dimension d (u32)
///   bytes 12..23  cells per axis (3 x u32; unused axes 0)
///   bytes 24..31  spacing h (f64)
///   bytes 32..39  snapshot time t (f64)
///   bytes 40..63  box center (3 x f64)
/// followed by cell values as little-endian f64 in grid order. The box half
/// width is implied: L = cells * h / 2.
void write_binary(const GridFunction& f, const std::string& path);
GridFunction read_binary(const std::string& path);

}  // namespace roughflow::fpe

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "bosonstar/errors.hpp"

namespace bosonstar {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }

/// Default cap on the total number of grid points (2^24 complex doubles = 256 MiB).
inline constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 24;

/// Periodic box [-L/2, L/2)^d sampled by n points per axis. Axes beyond `dim`
/// are inert (one point, unit length) so loops can always run over three axes.
struct GridSpec {
  int dim = 1;
  std::array<std::size_t, 3> points{1, 1, 1};
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  static GridSpec cube(int d, std::size_t n, double length) {
    GridSpec g;
    g.dim = d;
    for (int a = 0; a < 3; ++a) {
      g.points[a] = a < d ? n : 1;
      g.lengths[a] = a < d ? length : 1.0;
    }
    g.validate();
    return g;
  }

  static GridSpec make(int d, const std::array<std::size_t, 3>& n, const std::array<double, 3>& len) {
    GridSpec g;
    g.dim = d;
    for (int a = 0; a < 3; ++a) {
      g.points[a] = a < d ? n[a] : 1;
      g.lengths[a] = a < d ? len[a] : 1.0;
    }
    g.validate();
    return g;
  }

  void validate(std::size_t max_points = kDefaultMaxPoints) const {
    if (dim < 1 || dim > 3) throw InvalidGrid("dimension must be 1, 2 or 3, got " + std::to_string(dim));
    for (int a = 0; a < dim; ++a) {
      const auto n = points[a];
      if (n < 2 || (n & (n - 1)) != 0)
        throw InvalidGrid("points per axis must be a power of two >= 2, axis " + std::to_string(a) + " has " +
                          std::to_string(n));
      if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
        throw InvalidGrid("box length must be positive on axis " + std::to_string(a));
    }
    if (size() > max_points)
      throw InvalidGrid("grid has " + std::to_string(size()) + " points, above the cap of " +
                        std::to_string(max_points));
  }

  std::size_t size() const { return points[0] * points[1] * points[2]; }
  double spacing(int axis) const { return lengths[axis] / static_cast<double>(points[axis]); }
  double freq_spacing(int axis) const { return 2.0 * std::numbers::pi / lengths[axis]; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
  }
  double freq_cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= freq_spacing(a);
    return v;
  }
  double volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= lengths[a];
    return v;
  }

  double coordinate(int axis, std::size_t i) const {
    return -0.5 * lengths[axis] + static_cast<double>(i) * spacing(axis);
  }

  /// Signed mode number of storage slot i (FFT order: 0..n/2-1, then -n/2..-1).
  long mode(int axis, std::size_t i) const {
    const auto n = static_cast<long>(points[axis]);
    const auto k = static_cast<long>(i);
    return k < n / 2 ? k : k - n;
  }
  double wavenumber(int axis, std::size_t i) const {
    return axis < dim ? static_cast<double>(mode(axis, i)) * freq_spacing(axis) : 0.0;
  }
  double nyquist(int axis) const { return std::numbers::pi / spacing(axis); }

  /// Storage slot of the signed mode k on an axis.
  std::size_t slot(int axis, long k) const {
    const auto n = static_cast<long>(points[axis]);
    return static_cast<std::size_t>(((k % n) + n) % n);
  }

  std::size_t flat(std::size_t i0, std::size_t i1, std::size_t i2) const {
    return (i0 * points[1] + i1) * points[2] + i2;
  }

  bool operator==(const GridSpec& o) const {
    if (dim != o.dim) return false;
    for (int a = 0; a < 3; ++a)
      if (points[a] != o.points[a] || lengths[a] != o.lengths[a]) return false;
    return true;
  }
};

/// Per-axis coordinate and wavenumber tables, built once per loop.
struct AxisTables {
  std::array<std::vector<double>, 3> x;
  std::array<std::vector<double>, 3> xi;
  explicit AxisTables(const GridSpec& g) {
    for (int a = 0; a < 3; ++a) {
      x[a].resize(g.points[a]);
      xi[a].resize(g.points[a]);
      for (std::size_t i = 0; i < g.points[a]; ++i) {
        x[a][i] = a < g.dim ? g.coordinate(a, i) : 0.0;
        xi[a][i] = g.wavenumber(a, i);
      }
    }
  }
};

/// Calls f(flat_index, x) for every grid point in storage order.
template <class F>
void for_each_point(const GridSpec& g, F&& f) {
  const AxisTables t(g);
  std::size_t idx = 0;
  Vec3 p{};
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    p[0] = t.x[0][i];
    for (std::size_t j = 0; j < g.points[1]; ++j) {
      p[1] = t.x[1][j];
      for (std::size_t k = 0; k < g.points[2]; ++k, ++idx) {
        p[2] = t.x[2][k];
        f(idx, static_cast<const Vec3&>(p));
      }
    }
  }
}

/// Calls f(flat_index, xi) for every lattice frequency in storage order.
template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
  const AxisTables t(g);
  std::size_t idx = 0;
  Vec3 q{};
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    q[0] = t.xi[0][i];
    for (std::size_t j = 0; j < g.points[1]; ++j) {
      q[1] = t.xi[1][j];
      for (std::size_t k = 0; k < g.points[2]; ++k, ++idx) {
        q[2] = t.xi[2][k];
        f(idx, static_cast<const Vec3&>(q));
      }
    }
  }
}

/// Flat storage index of the lattice frequency with signed mode numbers k.
inline std::size_t mode_index(const GridSpec& g, const std::array<long, 3>& k) {
  return g.flat(g.slot(0, k[0]), g.slot(1, g.dim > 1 ? k[1] : 0), g.slot(2, g.dim > 2 ? k[2] : 0));
}

inline Vec3 lattice_frequency(const GridSpec& g, const std::array<long, 3>& k) {
  Vec3 q{};
  for (int a = 0; a < g.dim; ++a) q[a] = static_cast<double>(k[a]) * g.freq_spacing(a);
  return q;
}

}  // namespace bosonstar

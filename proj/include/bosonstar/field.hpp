#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "bosonstar/errors.hpp"
#include "bosonstar/fft.hpp"
#include "bosonstar/grid.hpp"

namespace bosonstar {

enum class Representation { physical, frequency };

/// Complex samples on a periodic grid, held either as point values or as
/// unitary Fourier coefficients. Immutable: every operation returns a new field.
class SpectralField {
 public:
  SpectralField() = default;

  explicit SpectralField(GridSpec grid, Representation rep = Representation::physical)
      : grid_(grid), rep_(rep), values_(grid.size()) {}

  SpectralField(GridSpec grid, std::vector<cplx> values, Representation rep = Representation::physical)
      : grid_(grid), rep_(rep), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidArgument("value count does not match grid size");
  }

  /// Samples f(x) at every grid point.
  template <class F>
  static SpectralField from_function(const GridSpec& grid, F&& f) {
    std::vector<cplx> v(grid.size());
    for_each_point(grid, [&](std::size_t i, const Vec3& x) { v[i] = cplx(f(x)); });
    return SpectralField(grid, std::move(v), Representation::physical);
  }

  /// Fills lattice coefficients from m(xi).
  template <class F>
  static SpectralField from_symbol(const GridSpec& grid, F&& m) {
    std::vector<cplx> v(grid.size());
    for_each_mode(grid, [&](std::size_t i, const Vec3& xi) { v[i] = cplx(m(xi)); });
    return SpectralField(grid, std::move(v), Representation::frequency);
  }

  const GridSpec& grid() const { return grid_; }
  Representation representation() const { return rep_; }
  bool is_physical() const { return rep_ == Representation::physical; }
  std::span<const cplx> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  /// Moves the storage out; the field is left empty.
  std::vector<cplx> release() && { return std::move(values_); }

  SpectralField to_frequency() const {
    if (rep_ == Representation::frequency) return *this;
    auto v = values_;
    forward_transform(grid_, v);
    return SpectralField(grid_, std::move(v), Representation::frequency);
  }

  SpectralField to_physical() const {
    if (rep_ == Representation::physical) return *this;
    auto v = values_;
    inverse_transform(grid_, v);
    return SpectralField(grid_, std::move(v), Representation::physical);
  }

  SpectralField in(Representation rep) const {
    return rep == Representation::physical ? to_physical() : to_frequency();
  }

  /// L2 norm, evaluated with the quadrature weight of the current representation.
  double l2_norm() const {
    double s = 0.0;
    for (const auto& z : values_) s += std::norm(z);
    const double w = rep_ == Representation::physical ? grid_.cell_volume() : grid_.freq_cell_volume();
    return std::sqrt(s * w);
  }

  SpectralField operator+(const SpectralField& o) const { return combine(o, 1.0); }
  SpectralField operator-(const SpectralField& o) const { return combine(o, -1.0); }

  SpectralField operator*(cplx a) const {
    auto v = values_;
    for (auto& z : v) z *= a;
    return SpectralField(grid_, std::move(v), rep_);
  }
  friend SpectralField operator*(cplx a, const SpectralField& f) { return f * a; }

 private:
  SpectralField combine(const SpectralField& o, double sign) const {
    if (!(grid_ == o.grid_)) throw GridMismatch();
    const auto other = o.in(rep_);
    auto v = values_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += sign * other.values_[i];
    return SpectralField(grid_, std::move(v), rep_);
  }

  GridSpec grid_{};
  Representation rep_ = Representation::physical;
  std::vector<cplx> values_;
};

inline void require_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch();
}

/// max |a - b| / max |b| over the physical samples.
inline double relative_sup_difference(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b);
  const auto pa = a.to_physical();
  const auto pb = b.to_physical();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    num = std::max(num, std::abs(pa[i] - pb[i]));
    den = std::max(den, std::abs(pb[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace bosonstar

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"

namespace bosonstar {

/// Japanese bracket <xi> = sqrt(1 + |xi|^2).
inline double bracket(const Vec3& xi) { return std::sqrt(1.0 + norm2(xi)); }

/// Symbol of Theta^2: |xi|^2 / (1 + |xi|^2), always in [0, 1).
inline double theta_squared(const Vec3& xi) {
  const double q = norm2(xi);
  return q / (1.0 + q);
}

/// Multiplies the lattice coefficients of `field` by m(xi) and returns the
/// result in the representation the input was given in. `m` may return a real
/// or complex number.
template <class Symbol>
SpectralField apply_multiplier(const SpectralField& field, Symbol&& m) {
  auto freq = field.to_frequency();
  const GridSpec grid = field.grid();
  auto v = std::move(freq).release();
  bool finite = true;
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi) {
    const cplx s(m(xi));
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) finite = false;
    v[i] *= s;
  });
  if (!finite) throw NonFiniteSymbol("multiplier symbol is not finite on the lattice");
  SpectralField out(grid, std::move(v), Representation::frequency);
  return field.is_physical() ? out.to_physical() : out;
}

/// Linear half-Klein-Gordon flow e^{-it<nabla>}.
inline SpectralField free_propagate(const SpectralField& field, double t) {
  return apply_multiplier(field, [t](const Vec3& xi) { return std::polar(1.0, -t * bracket(xi)); });
}

/// Bessel potential <nabla>^s.
inline SpectralField bessel_potential(const SpectralField& field, double s) {
  return apply_multiplier(field, [s](const Vec3& xi) { return std::pow(1.0 + norm2(xi), 0.5 * s); });
}

/// f(Theta^2) for a scalar function f on [0, 1].
template <class F>
SpectralField velocity_calculus(const SpectralField& field, F&& f) {
  return apply_multiplier(field, [&f](const Vec3& xi) { return f(theta_squared(xi)); });
}

/// Component j of the instantaneous velocity Theta = -i nabla <nabla>^{-1}, symbol xi_j/<xi>.
inline SpectralField theta_component(const SpectralField& field, int axis) {
  if (axis < 0 || axis >= field.grid().dim) throw InvalidArgument("axis out of range: " + std::to_string(axis));
  return apply_multiplier(field, [axis](const Vec3& xi) { return xi[axis] / bracket(xi); });
}

/// Im sqrt(|xi|^2 + 2i n.xi) on the principal branch.
inline double g0_symbol(const Vec3& xi, const Vec3& n) {
  return std::sqrt(cplx(norm2(xi), 2.0 * dot(n, xi))).imag();
}

/// Supremum of |Im f_+| over the lattice; bounded by one.
inline double g0_symbol_max(const GridSpec& grid, const Vec3& n) {
  if (std::abs(norm2(n) - 1.0) > 1e-12) throw InvalidArgument("direction must be a unit vector");
  double best = 0.0;
  for_each_mode(grid, [&](std::size_t, const Vec3& xi) { best = std::max(best, std::abs(g0_symbol(xi, n))); });
  return best;
}

}  // namespace bosonstar

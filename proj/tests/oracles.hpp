#pragma once

// Slow reference implementations used to cross-check the FFT paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <bosonstar.hpp>

namespace oracle {

using bosonstar::cplx;
using bosonstar::GridSpec;

/// O(N^2) unitary DFT of a 1D field on the centred box, returned in FFT slot order.
inline std::vector<cplx> dense_forward(const GridSpec& g, const std::vector<cplx>& f) {
  const std::size_t n = g.points[0];
  const double h = g.spacing(0);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = g.wavenumber(0, k);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += f[j] * std::polar(1.0, -xi * g.coordinate(0, j));
    out[k] = acc * h / std::sqrt(2.0 * std::numbers::pi);
  }
  return out;
}

inline std::vector<cplx> dense_inverse(const GridSpec& g, const std::vector<cplx>& fh) {
  const std::size_t n = g.points[0];
  const double dxi = g.freq_spacing(0);
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = g.coordinate(0, j);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += fh[k] * std::polar(1.0, g.wavenumber(0, k) * x);
    out[j] = acc * dxi / std::sqrt(2.0 * std::numbers::pi);
  }
  return out;
}

/// Free evolution of e^{-x^2} on the whole line by trapezoid quadrature of the
/// Fourier integral, with frequency step dxi over [-kmax, kmax].
inline cplx free_gaussian(double x, double t, double dxi, double kmax) {
  const auto m = static_cast<long>(std::ceil(kmax / dxi));
  cplx acc = 0.0;
  for (long j = -m; j <= m; ++j) {
    const double xi = static_cast<double>(j) * dxi;
    const double fh = std::exp(-0.25 * xi * xi) / std::sqrt(2.0);
    acc += fh * std::polar(1.0, xi * x - t * std::sqrt(1.0 + xi * xi));
  }
  return acc * dxi / std::sqrt(2.0 * std::numbers::pi);
}

/// Circular convolution sum_j w(x_i - x_j) rho_j h with the difference wrapped into [-L/2, L/2).
template <class W>
std::vector<double> dense_convolution(const GridSpec& g, W&& w, const std::vector<double>& rho) {
  const std::size_t n = g.points[0];
  const double L = g.lengths[0], h = g.spacing(0);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d = g.coordinate(0, i) - g.coordinate(0, j);
      if (d >= 0.5 * L) d -= L;
      if (d < -0.5 * L) d += L;
      out[i] += w(d) * rho[j] * h;
    }
  return out;
}

/// Random smooth field localized near the origin: a few Gaussian packets.
inline bosonstar::SpectralField random_packets(const GridSpec& g, std::uint64_t seed, int count = 4,
                                               double spread = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct P {
    bosonstar::Vec3 c, k;
    double w;
    cplx a;
  };
  std::vector<P> ps;
  for (int i = 0; i < count; ++i) {
    P p{};
    for (int a = 0; a < g.dim; ++a) {
      p.c[a] = spread * u(rng);
      p.k[a] = 2.0 * u(rng);
    }
    p.w = 1.0 + 0.5 * (u(rng) + 1.0);
    p.a = cplx(u(rng), u(rng));
    ps.push_back(p);
  }
  return bosonstar::SpectralField::from_function(g, [&](const bosonstar::Vec3& x) {
    cplx s = 0.0;
    for (const auto& p : ps) {
      bosonstar::Vec3 d{x[0] - p.c[0], x[1] - p.c[1], x[2] - p.c[2]};
      s += p.a * std::exp(-0.5 * bosonstar::norm2(d) / (p.w * p.w)) * std::polar(1.0, bosonstar::dot(p.k, x));
    }
    return s;
  });
}

/// White noise in every grid value (not smooth).
inline bosonstar::SpectralField white_noise(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> v(g.size());
  for (auto& z : v) z = cplx(nd(rng), nd(rng));
  return bosonstar::SpectralField(g, std::move(v));
}

inline double rel_diff(const bosonstar::SpectralField& a, const bosonstar::SpectralField& b) {
  return (a.to_physical() - b.to_physical()).l2_norm() / b.l2_norm();
}

}  // namespace oracle

#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "bosonstar/grid.hpp"

namespace bosonstar {

using cplx = std::complex<double>;

namespace detail {

// Plans are created once per (shape, direction) and executed through the
// new-array interface, which FFTW documents as thread safe. Only the planner
// itself needs the lock.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const GridSpec& g, int sign) {
    const Key key{g.dim, g.points[0], g.points[1], g.points[2], sign};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::array<int, 3> n{};
    for (int a = 0; a < g.dim; ++a) n[a] = static_cast<int>(g.points[a]);
    auto* buf = fftw_alloc_complex(g.size());
    fftw_plan p = fftw_plan_dft(g.dim, n.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

inline void raw_transform(const GridSpec& g, std::span<cplx> data, int sign) {
  fftw_plan p = PlanCache::instance().get(g, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

/// (-1)^(k0+k1+k2): phase from centring the physical box at the origin.
inline double parity(std::size_t i0, std::size_t i1, std::size_t i2) {
  return ((i0 + i1 + i2) & 1u) ? -1.0 : 1.0;
}

template <class F>
void for_each_parity(const GridSpec& g, F&& f) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < g.points[0]; ++i)
    for (std::size_t j = 0; j < g.points[1]; ++j)
      for (std::size_t k = 0; k < g.points[2]; ++k, ++idx) f(idx, parity(i, j, k));
}

}  // namespace detail

/// Unitary transform in place: values become samples of
/// (2 pi)^{-d/2} \int e^{-i xi.x} psi(x) dx on the lattice.
inline void forward_transform(const GridSpec& g, std::span<cplx> data) {
  detail::raw_transform(g, data, FFTW_FORWARD);
  const double c = g.cell_volume() * std::pow(2.0 * std::numbers::pi, -0.5 * g.dim);
  detail::for_each_parity(g, [&](std::size_t idx, double s) { data[idx] *= c * s; });
}

/// Inverse of forward_transform.
inline void inverse_transform(const GridSpec& g, std::span<cplx> data) {
  const double c = g.cell_volume() * std::pow(2.0 * std::numbers::pi, -0.5 * g.dim);
  const double scale = 1.0 / (c * static_cast<double>(g.size()));
  detail::for_each_parity(g, [&](std::size_t idx, double s) { data[idx] *= scale * s; });
  detail::raw_transform(g, data, FFTW_BACKWARD);
}

}  // namespace bosonstar

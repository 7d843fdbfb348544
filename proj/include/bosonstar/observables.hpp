#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/multiplier.hpp"
#include "bosonstar/potentials.hpp"

namespace bosonstar {

// ---- conserved quantities and norms ----

inline double mass(const SpectralField& psi) {
  const double n = psi.l2_norm();
  return n * n;
}

/// P = -(i/2) int conj(psi) grad psi, computed as (1/2) sum xi |psi_hat|^2.
inline Vec3 momentum(const SpectralField& psi) {
  const auto f = psi.to_frequency();
  const auto v = f.values();
  Vec3 p{};
  for_each_mode(psi.grid(), [&](std::size_t i, const Vec3& xi) {
    const double a = std::norm(v[i]);
    for (int k = 0; k < 3; ++k) p[k] += xi[k] * a;
  });
  const double w = 0.5 * psi.grid().freq_cell_volume();
  for (auto& c : p) c *= w;
  return p;
}

inline double kinetic_energy(const SpectralField& psi) {
  const auto f = psi.to_frequency();
  const auto v = f.values();
  double e = 0.0;
  for_each_mode(psi.grid(), [&](std::size_t i, const Vec3& xi) { e += bracket(xi) * std::norm(v[i]); });
  return 0.5 * e * psi.grid().freq_cell_volume();
}

inline double interaction_energy(const SpectralField& psi, const ConvolutionKernel& kernel, bool dealias = true) {
  if (kernel.zero) return 0.0;
  const auto phys = psi.to_physical();
  const auto v = hartree_potential(phys, kernel, dealias);
  double e = 0.0;
  for (std::size_t i = 0; i < phys.size(); ++i) e += v[i].real() * std::norm(phys[i]);
  return 0.25 * e * psi.grid().cell_volume();
}

/// E = (1/2) ||<grad>^{1/2} psi||^2 + (1/4) int (w * |psi|^2) |psi|^2.
inline double energy(const SpectralField& psi, const ConvolutionKernel& kernel, bool dealias = true) {
  return kinetic_energy(psi) + interaction_energy(psi, kernel, dealias);
}

inline double hs_norm(const SpectralField& psi, double s) {
  const auto f = psi.to_frequency();
  const auto v = f.values();
  double acc = 0.0;
  for_each_mode(psi.grid(), [&](std::size_t i, const Vec3& xi) { acc += std::pow(1.0 + norm2(xi), s) * std::norm(v[i]); });
  return std::sqrt(acc * psi.grid().freq_cell_volume());
}

inline double lp_norm(const SpectralField& psi, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("L^p norm requires p >= 1");
  const auto f = psi.to_physical();
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : f.values()) m = std::max(m, std::abs(z));
    return m;
  }
  double acc = 0.0;
  for (const auto& z : f.values()) acc += std::pow(std::abs(z), p);
  return std::pow(acc * psi.grid().cell_volume(), 1.0 / p);
}

inline double linf_norm(const SpectralField& psi) { return lp_norm(psi, std::numeric_limits<double>::infinity()); }

// ---- convex regions ----

struct Ball {
  Vec3 center{};
  double radius = 1.0;
};

/// {x : n . x >= offset}
struct HalfSpace {
  Vec3 normal{1.0, 0.0, 0.0};
  double offset = 0.0;
};

/// Axis-aligned box; axes left at +-infinity are unconstrained.
struct Box {
  Vec3 lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  Vec3 hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
};

using ConvexRegion = std::variant<Ball, HalfSpace, Box>;

inline void validate_region(const ConvexRegion& r) {
  if (const auto* b = std::get_if<Ball>(&r)) {
    if (!(b->radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  } else if (const auto* h = std::get_if<HalfSpace>(&r)) {
    if (std::abs(norm2(h->normal) - 1.0) > 1e-12) throw InvalidArgument("half-space normal must be a unit vector");
  } else {
    const auto& x = std::get<Box>(r);
    for (int a = 0; a < 3; ++a)
      if (!(x.lo[a] <= x.hi[a])) throw InvalidArgument("box requires lo <= hi");
  }
}

inline bool contains(const ConvexRegion& r, const Vec3& x) {
  if (const auto* b = std::get_if<Ball>(&r)) {
    Vec3 d{x[0] - b->center[0], x[1] - b->center[1], x[2] - b->center[2]};
    return norm2(d) <= b->radius * b->radius;
  }
  if (const auto* h = std::get_if<HalfSpace>(&r)) return dot(h->normal, x) >= h->offset;
  const auto& bx = std::get<Box>(r);
  for (int a = 0; a < 3; ++a)
    if (x[a] < bx.lo[a] || x[a] > bx.hi[a]) return false;
  return true;
}

/// L^2 norm of psi restricted to grid points inside the region.
inline double region_mass(const SpectralField& psi, const ConvexRegion& region) {
  const auto f = psi.to_physical();
  double acc = 0.0;
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) {
    if (contains(region, x)) acc += std::norm(f[i]);
  });
  return std::sqrt(acc * psi.grid().cell_volume());
}

namespace detail {

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 axpy(double s, const Vec3& a, const Vec3& b) { return {s * a[0] + b[0], s * a[1] + b[1], s * a[2] + b[2]}; }

inline double finite_clamp(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

inline Vec3 box_clamp(const Box& b, const Vec3& p) {
  return {finite_clamp(p[0], b.lo[0], b.hi[0]), finite_clamp(p[1], b.lo[1], b.hi[1]),
          finite_clamp(p[2], b.lo[2], b.hi[2])};
}

/// Box corner maximizing n . x (finite coordinates where n vanishes).
inline Vec3 box_support_point(const Box& b, const Vec3& n) {
  Vec3 p{};
  for (int a = 0; a < 3; ++a) {
    if (n[a] > 0.0) p[a] = b.hi[a];
    else if (n[a] < 0.0) p[a] = b.lo[a];
    else p[a] = finite_clamp(0.0, b.lo[a], b.hi[a]);
  }
  return p;
}

/// Nearest points (p in X, q in Y); only meaningful when the sets are apart.
inline std::pair<Vec3, Vec3> nearest(const Ball& x, const Ball& y) {
  const Vec3 d = sub(y.center, x.center);
  const double len = std::sqrt(norm2(d));
  const Vec3 u = len > 0 ? Vec3{d[0] / len, d[1] / len, d[2] / len} : Vec3{1, 0, 0};
  return {axpy(x.radius, u, x.center), axpy(-y.radius, u, y.center)};
}

inline std::pair<Vec3, Vec3> nearest(const Ball& x, const HalfSpace& y) {
  const Vec3 p = axpy(x.radius, y.normal, x.center);
  const Vec3 q = axpy(y.offset - dot(y.normal, x.center), y.normal, x.center);
  return {p, q};
}

inline std::pair<Vec3, Vec3> nearest(const Ball& x, const Box& y) {
  const Vec3 q = box_clamp(y, x.center);
  const Vec3 d = sub(q, x.center);
  const double len = std::sqrt(norm2(d));
  const Vec3 p = len > 0 ? axpy(x.radius / len, d, x.center) : x.center;
  return {p, q};
}

inline std::pair<Vec3, Vec3> nearest(const HalfSpace& x, const HalfSpace& y) {
  return {axpy(x.offset, x.normal, Vec3{}), axpy(y.offset, y.normal, Vec3{})};
}

inline std::pair<Vec3, Vec3> nearest(const Box& x, const HalfSpace& y) {
  const Vec3 p = box_support_point(x, y.normal);
  return {p, axpy(y.offset - dot(y.normal, p), y.normal, p)};
}

inline std::pair<Vec3, Vec3> nearest(const Box& x, const Box& y) {
  Vec3 p{}, q{};
  for (int a = 0; a < 3; ++a) {
    if (x.hi[a] < y.lo[a]) {
      p[a] = x.hi[a];
      q[a] = y.lo[a];
    } else if (y.hi[a] < x.lo[a]) {
      p[a] = x.lo[a];
      q[a] = y.hi[a];
    } else {
      p[a] = q[a] = finite_clamp(0.0, std::max(x.lo[a], y.lo[a]), std::min(x.hi[a], y.hi[a]));
    }
  }
  return {p, q};
}

template <class A, class B>
std::pair<Vec3, Vec3> nearest_swapped(const A& x, const B& y) {
  auto [q, p] = nearest(y, x);
  return {p, q};
}

}  // namespace detail

/// Exact Euclidean distance between two convex regions.
inline double region_distance(const ConvexRegion& x, const ConvexRegion& y) {
  return std::visit(
      [](const auto& a, const auto& b) -> double {
        using A = std::decay_t<decltype(a)>;
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<A, Ball> && std::is_same_v<B, Ball>) {
          return std::max(0.0, std::sqrt(norm2(detail::sub(a.center, b.center))) - a.radius - b.radius);
        } else if constexpr (std::is_same_v<A, Ball> && std::is_same_v<B, HalfSpace>) {
          return std::max(0.0, b.offset - dot(b.normal, a.center) - a.radius);
        } else if constexpr (std::is_same_v<A, Ball> && std::is_same_v<B, Box>) {
          return std::max(0.0, std::sqrt(norm2(detail::sub(detail::box_clamp(b, a.center), a.center))) - a.radius);
        } else if constexpr (std::is_same_v<A, HalfSpace> && std::is_same_v<B, HalfSpace>) {
          if (dot(a.normal, b.normal) > -1.0 + 1e-12) return 0.0;
          return std::max(0.0, a.offset + b.offset);
        } else if constexpr (std::is_same_v<A, Box> && std::is_same_v<B, HalfSpace>) {
          return std::max(0.0, b.offset - dot(b.normal, detail::box_support_point(a, b.normal)));
        } else if constexpr (std::is_same_v<A, Box> && std::is_same_v<B, Box>) {
          double acc = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double gap = std::max({0.0, b.lo[k] - a.hi[k], a.lo[k] - b.hi[k]});
            acc += gap * gap;
          }
          return std::sqrt(acc);
        } else {
          return region_distance(ConvexRegion{b}, ConvexRegion{a});
        }
      },
      x, y);
}

/// Nearest points p in X and q in Y for regions at positive distance.
inline std::pair<Vec3, Vec3> nearest_points(const ConvexRegion& x, const ConvexRegion& y) {
  return std::visit(
      [](const auto& a, const auto& b) -> std::pair<Vec3, Vec3> {
        if constexpr (requires { detail::nearest(a, b); }) {
          return detail::nearest(a, b);
        } else {
          return detail::nearest_swapped(a, b);
        }
      },
      x, y);
}

/// Affine functional l(x) = n . (x - x0), negative on X and positive on Y.
struct SeparatingFunctional {
  Vec3 normal{};
  Vec3 origin{};
  double operator()(const Vec3& x) const { return dot(normal, detail::sub(x, origin)); }
};

inline SeparatingFunctional separating_functional(const ConvexRegion& x, const ConvexRegion& y) {
  const double dist = region_distance(x, y);
  if (!(dist > 0.0)) throw InvalidArgument("regions are not separated");
  const auto [p, q] = nearest_points(x, y);
  const Vec3 d = detail::sub(q, p);
  const double len = std::sqrt(norm2(d));
  return {{d[0] / len, d[1] / len, d[2] / len}, {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])}};
}

// ---- exponential weights ----

/// Natural log of ||e^{sign l} psi||, l(x) = n . (x - x0); never overflows.
// `slab` restricts the sum to |l(x)| <= slab. On a periodic box the linear weight
// is discontinuous at the wrap and amplifies roundoff far from x0.
inline double log_exp_weight_norm(const SpectralField& psi, const Vec3& n, const Vec3& x0, int sign,
                                  double slab = std::numeric_limits<double>::infinity()) {
  if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
  if (!(slab > 0.0)) throw InvalidArgument("slab half-width must be positive");
  const auto f = psi.to_physical();
  std::vector<double> expo(f.size());
  std::vector<char> used(f.size());
  double top = -std::numeric_limits<double>::infinity();
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) {
    const double l = dot(n, detail::sub(x, x0));
    expo[i] = sign * l;
    used[i] = std::abs(l) <= slab;
    if (used[i] && f[i] != cplx(0.0)) top = std::max(top, expo[i]);
  });
  if (std::isinf(top)) return top;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (used[i]) acc += std::exp(2.0 * (expo[i] - top)) * std::norm(f[i]);
  return top + 0.5 * std::log(acc * psi.grid().cell_volume());
}

inline double exp_weight_norm(const SpectralField& psi, const Vec3& n, const Vec3& x0, int sign,
                              double slab = std::numeric_limits<double>::infinity()) {
  const auto f = psi.to_physical();
  double top = -std::numeric_limits<double>::infinity();
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) {
    const double l = dot(n, detail::sub(x, x0));
    if (std::abs(l) <= slab && f[i] != cplx(0.0)) top = std::max(top, sign * l);
  });
  if (top > 700.0) throw OverflowRisk("exponential weight exponent " + std::to_string(top) + " exceeds 700");
  return std::exp(log_exp_weight_norm(f, n, x0, sign, slab));
}

// ---- velocity observables ----

/// L^2 norm over grid points with |x|^2 / t^2 in [a, b).
inline double velocity_band_mass(const SpectralField& psi, double t, double a, double b) {
  if (!(t > 0.0)) throw InvalidArgument("velocity band requires t > 0");
  const auto f = psi.to_physical();
  double acc = 0.0;
  const double t2 = t * t;
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) {
    const double u = norm2(x) / t2;
    if (u >= a && u < b) acc += std::norm(f[i]);
  });
  return std::sqrt(acc * psi.grid().cell_volume());
}

/// ||g(x^2/t^2) f(Theta^2) psi||.
template <class G, class F>
double phase_space_norm(const SpectralField& psi, double t, G&& g, F&& f) {
  if (!(t > 0.0)) throw InvalidArgument("phase-space norm requires t > 0");
  const auto filtered = velocity_calculus(psi, f).to_physical();
  auto v = SpectralField(filtered).release();
  const double t2 = t * t;
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) { v[i] *= g(norm2(x) / t2); });
  return SpectralField(psi.grid(), std::move(v)).l2_norm();
}

/// sum_j ||(c x_j + Theta_j) psi||^2, the building block of the two velocity identities.
inline double position_theta_norm2(const SpectralField& psi, double c_x, double c_theta) {
  const auto phys = psi.to_physical();
  double acc = 0.0;
  for (int a = 0; a < psi.grid().dim; ++a) {
    auto th = theta_component(phys, a);
    auto v = std::move(th).release();
    for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) { v[i] = c_x * x[a] * phys[i] + c_theta * v[i]; });
    const double n = SpectralField(psi.grid(), std::move(v)).l2_norm();
    acc += n * n;
  }
  return acc;
}

/// sum_j ||(x_j/t - Theta_j) psi||^2.
inline double velocity_defect(const SpectralField& psi, double t) {
  if (!(t > 0.0)) throw InvalidArgument("velocity defect requires t > 0");
  return position_theta_norm2(psi, 1.0 / t, -1.0);
}

/// ||<x>^gamma <grad>^s psi||.
inline double weighted_norm(const SpectralField& psi, double gamma, double s) {
  if (gamma < 0.0 || gamma > 2.0) throw InvalidArgument("weight exponent must lie in [0, 2]");
  if (s < 0.0) throw InvalidArgument("smoothness exponent must be nonnegative");
  auto v = std::move(bessel_potential(psi.to_physical(), s).to_physical()).release();
  for_each_point(psi.grid(), [&](std::size_t i, const Vec3& x) { v[i] *= std::pow(1.0 + norm2(x), 0.5 * gamma); });
  return SpectralField(psi.grid(), std::move(v)).l2_norm();
}

// ---- smooth cutoffs ----

namespace detail {
inline double smooth_zero(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
/// C^infty step from 0 (s <= 0) to 1 (s >= 1).
inline double smooth_step(double s) {
  const double a = smooth_zero(s);
  const double b = smooth_zero(1.0 - s);
  return a / (a + b);
}
}  // namespace detail

/// Standard bump e^{1 - 1/(1-v^2)} rescaled to (lo, hi); peak value 1.
struct SmoothBump {
  double lo = 0.0;
  double hi = 1.0;
  double operator()(double u) const {
    if (u <= lo || u >= hi) return 0.0;
    const double v = (2.0 * u - lo - hi) / (hi - lo);
    return std::exp(1.0 - 1.0 / (1.0 - v * v));
  }
  std::pair<double, double> support() const { return {lo, hi}; }
};

/// Equal to 1 on [lo, hi] with C^infty ramps of width `ramp` on each side.
/// A side with infinite bound has no ramp.
struct SmoothPlateau {
  double lo = 0.0;
  double hi = 1.0;
  double ramp = 0.1;
  double operator()(double u) const {
    if (u >= lo && u <= hi) return 1.0;
    if (u < lo) return detail::smooth_step((u - (lo - ramp)) / ramp);
    return detail::smooth_step(((hi + ramp) - u) / ramp);
  }
  std::pair<double, double> support() const { return {lo - ramp, hi + ramp}; }
};

// ---- observable records ----

/// One row of diagnostics: time plus an ordered list of named scalars.
struct ObservableRecord {
  double t = 0.0;
  std::vector<std::pair<std::string, double>> values;

  void set(const std::string& name, double v) {
    for (auto& kv : values)
      if (kv.first == name) {
        kv.second = v;
        return;
      }
    values.emplace_back(name, v);
  }
  double get(const std::string& name) const {
    for (const auto& kv : values)
      if (kv.first == name) return kv.second;
    throw InvalidArgument("record has no column \"" + name + "\"");
  }
  bool has(const std::string& name) const {
    return std::any_of(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
  }
  bool finite() const {
    return std::isfinite(t) &&
           std::all_of(values.begin(), values.end(), [](const auto& kv) { return std::isfinite(kv.second); });
  }
};

struct RecordOptions {
  double hs_s = -1.0;  // negative: d/2 + 1
  double lp = 4.0;
  bool dealias = true;
};

/// Standard columns: mass, energy, momentum_1..d, Hs_norm, Linf_norm, Lp_norm.
inline ObservableRecord standard_record(const SpectralField& psi, const ConvolutionKernel& kernel, double t,
                                        const RecordOptions& opt = {}) {
  ObservableRecord r;
  r.t = t;
  const int d = psi.grid().dim;
  const double s = opt.hs_s >= 0.0 ? opt.hs_s : 0.5 * d + 1.0;
  r.set("mass", mass(psi));
  r.set("energy", energy(psi, kernel, opt.dealias));
  const auto p = momentum(psi);
  for (int a = 0; a < d; ++a) r.set("momentum_" + std::to_string(a + 1), p[a]);
  r.set("Hs_norm", hs_norm(psi, s));
  r.set("Linf_norm", linf_norm(psi));
  r.set("Lp_norm", lp_norm(psi, opt.lp));
  return r;
}

/// CSV with header t followed by the union of column names in first-seen order.
inline void write_records_csv(std::ostream& os, const std::vector<ObservableRecord>& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (const auto& kv : r.values)
      if (std::find(cols.begin(), cols.end(), kv.first) == cols.end()) cols.push_back(kv.first);
  os << "t";
  for (const auto& c : cols) os << ',' << c;
  os << '\n';
  os.precision(17);
  for (const auto& r : rows) {
    os << r.t;
    for (const auto& c : cols) {
      os << ',';
      if (r.has(c)) os << r.get(c);
    }
    os << '\n';
  }
}

}  // namespace bosonstar

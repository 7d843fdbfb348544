#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bosonstar/errors.hpp"

namespace bosonstar {

/// value ~ constant * t^exponent, fitted by least squares in log-log space.
struct PowerLawFit {
  double exponent = 0.0;
  double constant = 0.0;
  double residual = 0.0;  // rms of log residuals
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;

  double operator()(double t) const { return constant * std::pow(t, exponent); }
};

/// Fits samples with t in [t_lo, t_hi] and positive finite values.
inline PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi) {
  if (t.size() != v.size()) throw InvalidArgument("fit: time and value series differ in length");
  if (!(t_lo < t_hi)) throw InvalidArgument("fit: degenerate window");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || !(t[i] > 0.0) || !(v[i] > 0.0) || !std::isfinite(v[i])) continue;
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(v[i]));
  }
  const std::size_t n = lx.size();
  if (n < 2) throw InvalidArgument("fit: fewer than two usable samples in window");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit: all samples at one time");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  const double b = my - f.exponent * mx;
  f.constant = std::exp(b);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (b + f.exponent * lx[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  f.points = n;
  return f;
}

inline PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi) {
  return fit_power_law(std::span<const double>(t), std::span<const double>(v), t_lo, t_hi);
}

/// True when v is strictly decreasing over the samples with t in [t_lo, t_hi].
inline bool strictly_decreasing(const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi) {
  bool have = false;
  double prev = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (have && !(v[i] < prev)) return false;
    prev = v[i];
    have = true;
  }
  return have;
}

}  // namespace bosonstar

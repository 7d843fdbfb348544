#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonstar/dynamics.hpp"
#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/fit.hpp"
#include "bosonstar/multiplier.hpp"
#include "bosonstar/observables.hpp"

namespace bosonstar {

struct ScatteringConfig {
  double T_inf = 40.0;        // truncation horizon of the improper integrals
  double dt = 0.05;
  bool tail_estimate = true;  // add the extrapolated tail beyond T_inf to the state
  double tol = 1e-10;         // fixed-point tolerance (relative H^s)
  int max_iter = 60;
  double s = -1.0;            // negative: d/2 + 1
  bool dealias = true;
  std::size_t samples = 64;   // stored interaction-picture states along [0, T_inf]
  double fit_start = 5.0;

  void validate() const {
    std::vector<std::string> bad;
    if (!(T_inf > 0.0)) bad.push_back("scattering.T_inf must be positive");
    if (!(dt > 0.0)) bad.push_back("scattering.dt must be positive");
    if (!(tol > 0.0 && tol <= 1e-2)) bad.push_back("scattering.tol must lie in (0, 1e-2]");
    if (max_iter < 1) bad.push_back("scattering.max_iter must be at least 1");
    if (samples < 2) bad.push_back("scattering.samples must be at least 2");
    if (!bad.empty()) throw ConfigInvalid(bad);
  }
  std::size_t steps() const { return static_cast<std::size_t>(std::ceil(T_inf / dt - 1e-9)); }
  double sobolev_index(int dim) const { return s >= 0.0 ? s : 0.5 * dim + 1.0; }
};

struct ScatteringResult {
  SpectralField state;                 // psi_plus for inverse_wave, psi_0 for wave_operator
  std::vector<double> residual_history;
  double tail_bound = 0.0;             // bound on the H^s size of the integral beyond T_inf
  double tail_exponent = 0.0;          // fitted decay exponent of the integrand norm
  double tail_fit_residual = 0.0;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();  // of ||psi_t - e^{-itK} psi_plus||
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  double fit_t_lo = 0.0, fit_t_hi = 0.0;
  std::vector<double> ratios;          // fixed-point contraction ratios
  std::vector<double> times;           // sample times
  std::vector<double> integrand_norms; // H^s norm of the integrand at sample times
  std::vector<double> distance_hs;     // ||psi_t - e^{-itK} psi_plus||_{H^s} at sample times
  std::vector<double> distance_l2;
  double T_inf = 0.0;
  double smallness = std::numeric_limits<double>::quiet_NaN();  // ||w|| ||psi||^2, filled by callers
};

namespace detail {

inline double weighted_norm_of(const std::vector<cplx>& v, const std::vector<double>& weight, double cell) {
  return hs_norm_from_table(v, weight, cell);
}

struct TailFit {
  double beta = 0.0;  // integrand ~ tau^{-beta}
  double residual = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  double factor = 0.0;  // tail integral ~ factor * g(T); zero when extrapolation is unreliable
};

/// Below this decay rate the extrapolated tail vector is too long to trust; the
/// bound is still reported but the state is left uncorrected.
inline constexpr double kTailCorrectionMinDecay = 1.5;

/// Power-law fit of the integrand norm over the second half of [0, T].
inline TailFit fit_tail(const std::vector<double>& t, const std::vector<double>& norms, double T, double fit_start) {
  TailFit out;
  const double lo = std::max(0.5 * T, std::min(fit_start, 0.75 * T));
  if (norms.back() == 0.0) {
    out.bound = 0.0;
    return out;
  }
  const auto f = fit_power_law(t, norms, lo, T);
  out.beta = -f.exponent;
  out.residual = f.residual;
  if (out.beta > 1.0) {
    out.bound = f(T) * T / (out.beta - 1.0);
    if (out.beta >= kTailCorrectionMinDecay) out.factor = T / (out.beta - 1.0);
  }
  return out;
}

inline void check_tail_decay(const std::vector<double>& t, const std::vector<double>& norms, double T) {
  double at_three_quarters = -1.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= 0.75 * T) {
      at_three_quarters = norms[i];
      break;
    }
  if (norms.back() > 0.0 && !(norms.back() < at_three_quarters))
    throw TailNotDecaying("Duhamel integrand norm does not decrease over the last quarter of [0, T_inf]");
}

}  // namespace detail

/// psi_plus = psi0 - i int_0^T e^{i tau K} (w * |psi_tau|^2) psi_tau d tau along a Strang
/// trajectory (trapezoid rule), plus the extrapolated tail when tail_estimate is set.
inline ScatteringResult inverse_wave(const SpectralField& psi0, const ConvolutionKernel& kernel,
                                     const ScatteringConfig& cfg) {
  cfg.validate();
  if (!(psi0.grid() == kernel.grid)) throw GridMismatch();
  const GridSpec g = psi0.grid();
  const std::size_t N = g.size();
  const std::size_t M = cfg.steps();
  const double h = cfg.T_inf / static_cast<double>(M);
  const std::size_t stride = std::max<std::size_t>(1, M / (cfg.samples - 1));
  const auto weight = detail::hs_weight_table(g, cfg.sobolev_index(g.dim));
  const double cell = g.freq_cell_volume();

  ScatteringResult res;
  res.T_inf = cfg.T_inf;
  auto v = psi0.to_frequency().release();
  const auto base = v;
  StrangStepper stepper(kernel, h, cfg.dealias);
  DuhamelIntegrand integrand(kernel, cfg.dealias);

  std::vector<cplx> acc(N, cplx(0.0)), prev, cur;
  std::vector<std::vector<cplx>> stored;
  std::vector<double> all_t{0.0}, all_norm;
  integrand(0.0, v, prev);
  all_norm.push_back(detail::weighted_norm_of(prev, weight, cell));
  res.times.push_back(0.0);
  res.integrand_norms.push_back(all_norm.back());
  stored.push_back(acc);
  for (std::size_t m = 1; m <= M; ++m) {
    stepper.step(v);
    const double t = static_cast<double>(m) * h;
    integrand(t, v, cur);
    for (std::size_t i = 0; i < N; ++i) acc[i] += 0.5 * h * (prev[i] + cur[i]);
    std::swap(prev, cur);
    all_t.push_back(t);
    all_norm.push_back(detail::weighted_norm_of(prev, weight, cell));
    if (m % stride == 0 || m == M) {
      res.times.push_back(t);
      res.integrand_norms.push_back(all_norm.back());
      stored.push_back(acc);
    }
  }

  detail::check_tail_decay(all_t, all_norm, cfg.T_inf);
  const auto tail = detail::fit_tail(all_t, all_norm, cfg.T_inf, cfg.fit_start);
  res.tail_exponent = -tail.beta;
  res.tail_fit_residual = tail.residual;
  res.tail_bound = tail.bound;

  // Full integral estimate: J(T) plus, optionally, g(T) * T / (beta - 1).
  std::vector<cplx> total = acc;
  if (cfg.tail_estimate && tail.factor > 0.0)
    for (std::size_t i = 0; i < N; ++i) total[i] += tail.factor * prev[i];

  std::vector<cplx> plus(N);
  for (std::size_t i = 0; i < N; ++i) plus[i] = base[i] - cplx(0.0, 1.0) * total[i];
  res.state = SpectralField(g, plus, Representation::frequency).to_physical();

  // ||psi_t - e^{-itK} psi_plus|| = ||total - J(t)|| by unitarity.
  std::vector<double> one(N, 1.0);
  std::vector<cplx> diff(N);
  for (const auto& j : stored) {
    for (std::size_t i = 0; i < N; ++i) diff[i] = total[i] - j[i];
    res.distance_hs.push_back(detail::weighted_norm_of(diff, weight, cell));
    res.distance_l2.push_back(detail::weighted_norm_of(diff, one, cell));
  }
  res.residual_history = res.distance_hs;

  const double lo = std::min(cfg.fit_start, 0.5 * cfg.T_inf);
  const double hi = 0.9 * cfg.T_inf;
  try {
    const auto f = fit_power_law(res.times, res.distance_hs, lo, hi);
    res.fitted_exponent = f.exponent;
    res.fit_residual = f.residual;
    res.fit_t_lo = lo;
    res.fit_t_hi = hi;
  } catch (const InvalidArgument&) {
    // zero distances (w = 0) leave the exponent undefined
  }
  return res;
}

/// Omega_+ psi_plus: backward fixed point of
/// psi_t = e^{-itK} psi_plus + i int_t^T e^{-i(t-tau)K} (w * |psi_tau|^2) psi_tau d tau,
/// started from the free solution. Memory: two (steps+1) x N complex arrays.
inline ScatteringResult wave_operator(const SpectralField& psi_plus, const ConvolutionKernel& kernel,
                                      const ScatteringConfig& cfg) {
  cfg.validate();
  if (!(psi_plus.grid() == kernel.grid)) throw GridMismatch();
  const GridSpec g = psi_plus.grid();
  const std::size_t N = g.size();
  const std::size_t M = cfg.steps();
  const double h = cfg.T_inf / static_cast<double>(M);
  const auto weight = detail::hs_weight_table(g, cfg.sobolev_index(g.dim));
  const double cell = g.freq_cell_volume();

  const auto plus = psi_plus.to_frequency().release();
  const double ref = detail::weighted_norm_of(plus, weight, cell);
  DuhamelIntegrand integrand(kernel, cfg.dealias);

  std::vector<std::vector<cplx>> psi(M + 1, plus);
  std::vector<double> t(M + 1);
  for (std::size_t m = 0; m <= M; ++m) {
    t[m] = static_cast<double>(m) * h;
    integrand.propagate(psi[m], t[m]);
  }
  std::vector<std::vector<cplx>> gval(M + 1);
  std::vector<double> gnorm(M + 1);

  ScatteringResult res;
  res.T_inf = cfg.T_inf;
  std::vector<cplx> acc(N), tail_vec(N), next(N);
  int above_one = 0;
  bool converged = false;
  detail::TailFit tail;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t m = 0; m <= M; ++m) {
      integrand(t[m], psi[m], gval[m]);
      gnorm[m] = detail::weighted_norm_of(gval[m], weight, cell);
    }
    if (!kernel.zero) tail = detail::fit_tail(t, gnorm, cfg.T_inf, cfg.fit_start);
    std::fill(tail_vec.begin(), tail_vec.end(), cplx(0.0));
    if (cfg.tail_estimate && tail.factor > 0.0)
      for (std::size_t i = 0; i < N; ++i) tail_vec[i] = tail.factor * gval[M][i];

    double diff = 0.0;
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    for (std::size_t k = 0; k <= M; ++k) {
      const std::size_t m = M - k;
      if (k > 0)
        for (std::size_t i = 0; i < N; ++i) acc[i] += 0.5 * h * (gval[m][i] + gval[m + 1][i]);
      for (std::size_t i = 0; i < N; ++i) next[i] = plus[i] + cplx(0.0, 1.0) * (acc[i] + tail_vec[i]);
      integrand.propagate(next, t[m]);
      double d2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) d2 += weight[i] * std::norm(next[i] - psi[m][i]);
      diff = std::max(diff, std::sqrt(d2 * cell));
      psi[m] = next;
    }
    if (!res.residual_history.empty()) {
      const double prev = res.residual_history.back();
      const double r = prev > 0.0 ? diff / prev : 0.0;
      res.ratios.push_back(r);
      above_one = r > 1.0 ? above_one + 1 : 0;
    }
    res.residual_history.push_back(diff);
    if (diff <= cfg.tol * ref) {
      converged = true;
      break;
    }
    if (above_one >= 2) throw NoContraction("wave operator iteration is expanding: data too large", res.ratios);
  }
  if (!converged) throw NoContraction("wave operator iteration did not reach tolerance", res.ratios);

  res.tail_exponent = -tail.beta;
  res.tail_fit_residual = tail.residual;
  res.tail_bound = kernel.zero ? 0.0 : tail.bound;
  res.times = t;
  res.integrand_norms = gnorm;
  res.state = SpectralField(g, psi[0], Representation::frequency).to_physical();
  return res;
}

struct RoundtripResult {
  double error = 0.0;  // ||Omega_+ W_+ psi - psi||_{H^s} / ||psi||_{H^s}
  ScatteringResult forward;
  ScatteringResult backward;
};

inline RoundtripResult roundtrip_report(const SpectralField& psi, const ConvolutionKernel& kernel,
                                        const ScatteringConfig& cfg) {
  RoundtripResult out;
  out.forward = inverse_wave(psi, kernel, cfg);
  out.backward = wave_operator(out.forward.state, kernel, cfg);
  const double s = cfg.sobolev_index(psi.grid().dim);
  out.error = hs_norm(out.backward.state - psi.to_physical(), s) / hs_norm(psi, s);
  return out;
}

inline double roundtrip(const SpectralField& psi, const ConvolutionKernel& kernel, const ScatteringConfig& cfg) {
  return roundtrip_report(psi, kernel, cfg).error;
}

struct MinVelocityState {
  SpectralField psi_plus;
  SpectralField psi0;
  ScatteringResult wave;
};

/// Velocity-band filter: 1 on the interior of (alpha, upper) with smooth ramps;
/// alpha <= 0 or upper >= 1 drop the corresponding ramp.
inline SmoothPlateau band_filter(double alpha, double upper) {
  const double ramp = 0.15 * (std::min(upper, 1.0) - std::max(alpha, 0.0));
  SmoothPlateau f;
  f.ramp = ramp;
  f.lo = alpha > 0.0 ? alpha + ramp : -std::numeric_limits<double>::infinity();
  f.hi = upper < 1.0 ? upper - ramp : std::numeric_limits<double>::infinity();
  return f;
}

/// psi_plus = f(Theta^2) seed rescaled to L^2 norm `amplitude`, psi0 = Omega_+ psi_plus.
inline MinVelocityState build_min_velocity_state(const SpectralField& seed, double alpha, double upper,
                                                 double amplitude, const ConvolutionKernel& kernel,
                                                 const ScatteringConfig& cfg) {
  if (!(alpha >= 0.0 && alpha < upper && upper <= 1.0)) throw InvalidArgument("velocity band must satisfy 0 <= alpha < upper <= 1");
  bool any = false;
  for_each_mode(seed.grid(), [&](std::size_t, const Vec3& xi) {
    const double th = theta_squared(xi);
    any = any || (th > alpha && th < upper);
  });
  if (!any) throw EmptyBand("no lattice frequency has Theta^2 inside the requested band");
  const auto f = band_filter(alpha, upper);
  auto filtered = velocity_calculus(seed.to_physical(), f);
  const double n = filtered.l2_norm();
  if (!(n > 0.0)) throw EmptyBand("seed has no content inside the requested velocity band");
  MinVelocityState out;
  out.psi_plus = filtered * cplx(amplitude / n);
  out.wave = wave_operator(out.psi_plus, kernel, cfg);
  out.psi0 = out.wave.state;
  return out;
}

inline nlohmann::json to_report(const ScatteringResult& r, const ScatteringConfig& cfg) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  return {{"residual_history", r.residual_history},
          {"tail_bound", finite_or_null(r.tail_bound)},
          {"tail_exponent", finite_or_null(r.tail_exponent)},
          {"fitted_exponent", finite_or_null(r.fitted_exponent)},
          {"fit_residual", finite_or_null(r.fit_residual)},
          {"fit_window", {r.fit_t_lo, r.fit_t_hi}},
          {"ratios", r.ratios},
          {"smallness", finite_or_null(r.smallness)},
          {"config",
           {{"T_inf", cfg.T_inf},
            {"dt", cfg.dt},
            {"tail_estimate", cfg.tail_estimate},
            {"tol", cfg.tol},
            {"max_iter", cfg.max_iter},
            {"s", cfg.s},
            {"dealias", cfg.dealias}}}};
}

}  // namespace bosonstar

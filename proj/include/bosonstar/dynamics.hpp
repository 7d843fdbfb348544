#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/multiplier.hpp"
#include "bosonstar/observables.hpp"
#include "bosonstar/potentials.hpp"

namespace bosonstar {

enum class Integrator { strang, picard };

struct SolverConfig {
  double dt = 0.01;
  double t_final = 1.0;
  Integrator integrator = Integrator::strang;
  double picard_tol = 1e-10;
  int picard_max_iter = 60;
  int snapshot_stride = 1;     // steps between recorded snapshots
  bool store_fields = true;    // keep field snapshots, not only records
  bool dealias = true;
  double blowup_factor = 50.0;  // H^s growth that counts as blow-up
  double hs_s = -1.0;           // negative: d/2 + 1
  double lp = 4.0;
  bool raise_on_blowup = false;

  void validate() const {
    std::vector<std::string> bad;
    if (!(dt > 0.0)) bad.push_back("solver.dt must be positive");
    if (!(t_final >= 0.0)) bad.push_back("solver.t_final must be nonnegative");
    if (!(picard_tol > 0.0 && picard_tol <= 1e-2)) bad.push_back("solver.picard_tol must lie in (0, 1e-2]");
    if (picard_max_iter < 1) bad.push_back("solver.picard_max_iter must be at least 1");
    if (snapshot_stride < 1) bad.push_back("solver.snapshot_stride must be at least 1");
    if (!(blowup_factor > 1.0)) bad.push_back("solver.blowup_factor must exceed 1");
    if (!bad.empty()) throw ConfigInvalid(bad);
  }

  /// Number of uniform steps covering [0, t_final]; dt is shrunk to fit.
  std::size_t steps() const { return t_final <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9)); }
  double effective_dt() const { return steps() == 0 ? dt : t_final / static_cast<double>(steps()); }
  double sobolev_index(int dim) const { return hs_s >= 0.0 ? hs_s : 0.5 * dim + 1.0; }
};

struct Trajectory {
  GridSpec grid;
  std::vector<double> times;
  std::vector<SpectralField> snapshots;  // empty unless store_fields
  std::vector<ObservableRecord> records;
  bool blowup = false;
  double blowup_time = 0.0;

  const SpectralField& final_state() const { return snapshots.back(); }
};

/// Strang stepper working on frequency-space coefficients in place.
/// One step costs four transforms (two when w = 0).
class StrangStepper {
 public:
  StrangStepper(const ConvolutionKernel& kernel, double dt, bool dealias = true)
      : kernel_(kernel), dt_(dt), dealias_(dealias) {
    const auto& g = kernel.grid;
    half_.resize(g.size());
    full_.resize(g.size());
    for_each_mode(g, [&](std::size_t i, const Vec3& xi) {
      const double w = bracket(xi);
      half_[i] = std::polar(1.0, -0.5 * dt * w);
      full_[i] = std::polar(1.0, -dt * w);
    });
  }

  double dt() const { return dt_; }

  void step(std::vector<cplx>& psi_hat) {
    if (kernel_.zero) {
      for (std::size_t i = 0; i < psi_hat.size(); ++i) psi_hat[i] *= full_[i];
      return;
    }
    const auto& g = kernel_.grid;
    for (std::size_t i = 0; i < psi_hat.size(); ++i) psi_hat[i] *= half_[i];
    inverse_transform(g, psi_hat);
    detail::hartree_into(kernel_, psi_hat, dealias_, potential_, scratch_);
    for (std::size_t i = 0; i < psi_hat.size(); ++i) psi_hat[i] *= std::polar(1.0, -dt_ * potential_[i]);
    forward_transform(g, psi_hat);
    for (std::size_t i = 0; i < psi_hat.size(); ++i) psi_hat[i] *= half_[i];
  }

 private:
  const ConvolutionKernel& kernel_;
  double dt_;
  bool dealias_;
  std::vector<cplx> half_, full_, scratch_;
  std::vector<double> potential_;
};

/// One Strang step: half free flow, exact phase exp(-i dt V[psi~]), half free flow.
/// Negative dt steps backwards; the scheme is exactly time reversible.
inline SpectralField strang_step(const SpectralField& psi, const ConvolutionKernel& kernel, double dt,
                                 bool dealias = true) {
  if (!(psi.grid() == kernel.grid)) throw GridMismatch();
  auto v = psi.to_frequency().release();
  StrangStepper(kernel, dt, dealias).step(v);
  SpectralField out(psi.grid(), std::move(v), Representation::frequency);
  return psi.is_physical() ? out.to_physical() : out;
}

/// Extra per-snapshot diagnostics; receives the state in physical space.
using SnapshotObserver = std::function<void(double t, const SpectralField& psi, ObservableRecord& rec)>;

namespace detail {

inline double hs_norm_from_table(const std::vector<cplx>& v, const std::vector<double>& weight, double cell) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += weight[i] * std::norm(v[i]);
  return std::sqrt(acc * cell);
}

inline std::vector<double> hs_weight_table(const GridSpec& g, double s) {
  std::vector<double> w(g.size());
  for_each_mode(g, [&](std::size_t i, const Vec3& xi) { w[i] = std::pow(1.0 + norm2(xi), s); });
  return w;
}

inline void record_snapshot(Trajectory& traj, const SolverConfig& cfg, const ConvolutionKernel& kernel, double t,
                            const SpectralField& psi_hat, const SnapshotObserver& observer) {
  const auto phys = psi_hat.to_physical();
  RecordOptions opt{cfg.sobolev_index(phys.grid().dim), cfg.lp, cfg.dealias};
  auto rec = standard_record(psi_hat, kernel, t, opt);
  if (observer) observer(t, phys, rec);
  traj.times.push_back(t);
  traj.records.push_back(std::move(rec));
  if (cfg.store_fields) traj.snapshots.push_back(phys);
}

}  // namespace detail

/// Strang time evolution with observables every snapshot_stride steps. Stops at
/// the first step whose H^s norm exceeds blowup_factor times the initial one.
inline Trajectory evolve(const SpectralField& psi0, const ConvolutionKernel& kernel, const SolverConfig& cfg,
                         const SnapshotObserver& observer = {}) {
  cfg.validate();
  if (!(psi0.grid() == kernel.grid)) throw GridMismatch();
  const GridSpec g = psi0.grid();
  Trajectory traj;
  traj.grid = g;
  const std::size_t n = cfg.steps();
  const double dt = cfg.effective_dt();
  const auto weight = detail::hs_weight_table(g, cfg.sobolev_index(g.dim));
  const double cell = g.freq_cell_volume();

  auto v = psi0.to_frequency().release();
  const double hs0 = detail::hs_norm_from_table(v, weight, cell);
  StrangStepper stepper(kernel, dt, cfg.dealias);
  detail::record_snapshot(traj, cfg, kernel, 0.0, SpectralField(g, v, Representation::frequency), observer);

  for (std::size_t k = 1; k <= n; ++k) {
    stepper.step(v);
    const double t = static_cast<double>(k) * dt;
    const double hs = detail::hs_norm_from_table(v, weight, cell);
    const bool blown = !std::isfinite(hs) || hs > cfg.blowup_factor * hs0;
    if (blown || k % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || k == n) {
      SpectralField cur(g, v, Representation::frequency);
      if (blown) {
        traj.blowup = true;
        traj.blowup_time = t;
        ObservableRecord rec;
        rec.t = t;
        rec.set("Hs_norm", hs);
        rec.set("blowup", 1.0);
        traj.times.push_back(t);
        traj.records.push_back(rec);
        if (cfg.store_fields) traj.snapshots.push_back(cur.to_physical());
        if (cfg.raise_on_blowup) throw BlowupDetected(t);
        break;
      }
      detail::record_snapshot(traj, cfg, kernel, t, cur, observer);
    }
  }
  return traj;
}

/// Interaction-picture Duhamel integrand e^{itK} F[(w * |psi|^2) psi] from psi_hat.
class DuhamelIntegrand {
 public:
  DuhamelIntegrand(const ConvolutionKernel& kernel, bool dealias) : kernel_(kernel), dealias_(dealias) {
    omega_.resize(kernel.grid.size());
    for_each_mode(kernel.grid, [&](std::size_t i, const Vec3& xi) { omega_[i] = bracket(xi); });
  }

  void operator()(double t, std::span<const cplx> psi_hat, std::vector<cplx>& out) {
    const std::size_t n = omega_.size();
    out.resize(n);
    if (kernel_.zero) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      return;
    }
    std::copy(psi_hat.begin(), psi_hat.end(), out.begin());
    inverse_transform(kernel_.grid, out);
    detail::hartree_into(kernel_, out, dealias_, potential_, scratch_);
    for (std::size_t i = 0; i < n; ++i) out[i] *= potential_[i];
    forward_transform(kernel_.grid, out);
    for (std::size_t i = 0; i < n; ++i) out[i] *= std::polar(1.0, t * omega_[i]);
  }

  /// v <- e^{-itK} v.
  void propagate(std::vector<cplx>& v, double t) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(1.0, -t * omega_[i]);
  }

 private:
  const ConvolutionKernel& kernel_;
  bool dealias_;
  std::vector<double> omega_, potential_;
  std::vector<cplx> scratch_;
};

struct PicardOptions {
  std::size_t steps = 100;  // time lattice intervals on [0, T]
  int max_iter = 60;
  double s = -1.0;  // negative: d/2 + 1
  bool dealias = true;
};

struct PicardReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> differences;  // sup_t H^s distance between successive iterates
  std::vector<double> ratios;       // differences[k] / differences[k-1]
};

struct PicardResult {
  Trajectory trajectory;
  PicardReport report;
};

/// Fixed-point iteration psi -> e^{-itK} (psi0 - i int_0^t e^{i tau K} (w*|psi|^2) psi dtau)
/// on a uniform time lattice, starting from the free solution. The time integral
/// uses the cumulative trapezoid rule.
inline PicardResult picard_solve(const SpectralField& psi0, const ConvolutionKernel& kernel, double T, double tol,
                                 const PicardOptions& opt = {}) {
  if (!(psi0.grid() == kernel.grid)) throw GridMismatch();
  if (!(T > 0.0)) throw InvalidArgument("Picard horizon must be positive");
  if (!(tol > 0.0 && tol <= 1e-2)) throw InvalidArgument("Picard tolerance must lie in (0, 1e-2]");
  if (opt.steps < 1) throw InvalidArgument("Picard lattice needs at least one step");
  const GridSpec g = psi0.grid();
  const std::size_t M = opt.steps;
  const double h = T / static_cast<double>(M);
  const std::size_t N = g.size();
  const double s = opt.s >= 0.0 ? opt.s : 0.5 * g.dim + 1.0;
  const auto weight = detail::hs_weight_table(g, s);
  const double cell = g.freq_cell_volume();

  DuhamelIntegrand integrand_of(kernel, opt.dealias);
  auto propagate = [&](std::vector<cplx>& v, double t) { integrand_of.propagate(v, t); };

  const auto base = psi0.to_frequency().release();
  const double hs0 = detail::hs_norm_from_table(base, weight, cell);

  std::vector<std::vector<cplx>> psi(M + 1, base);
  for (std::size_t m = 0; m <= M; ++m) propagate(psi[m], static_cast<double>(m) * h);
  std::vector<std::vector<cplx>> integrand(M + 1, std::vector<cplx>(N));

  PicardReport rep;
  std::vector<cplx> acc(N), next(N);
  int above_one = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t m = 0; m <= M; ++m) integrand_of(static_cast<double>(m) * h, psi[m], integrand[m]);
    double diff = 0.0;
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    for (std::size_t m = 0; m <= M; ++m) {
      if (m > 0)
        for (std::size_t i = 0; i < N; ++i) acc[i] += 0.5 * h * (integrand[m - 1][i] + integrand[m][i]);
      for (std::size_t i = 0; i < N; ++i) next[i] = base[i] - cplx(0.0, 1.0) * acc[i];
      propagate(next, static_cast<double>(m) * h);
      double d2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) d2 += weight[i] * std::norm(next[i] - psi[m][i]);
      diff = std::max(diff, std::sqrt(d2 * cell));
      psi[m] = next;
    }
    rep.iterations = it;
    if (!rep.differences.empty()) {
      const double prev = rep.differences.back();
      const double r = prev > 0.0 ? diff / prev : 0.0;
      rep.ratios.push_back(r);
      above_one = r > 1.0 ? above_one + 1 : 0;
    }
    rep.differences.push_back(diff);
    if (diff <= tol * hs0) {
      rep.converged = true;
      break;
    }
    if (above_one >= 2) throw NoContraction("Picard iteration is expanding: data too large or horizon too long", rep.ratios);
  }
  if (!rep.converged) throw NoContraction("Picard iteration did not reach tolerance", rep.ratios);

  PicardResult out;
  out.report = rep;
  out.trajectory.grid = g;
  for (std::size_t m = 0; m <= M; ++m) {
    const double t = static_cast<double>(m) * h;
    SpectralField f(g, psi[m], Representation::frequency);
    out.trajectory.times.push_back(t);
    out.trajectory.records.push_back(standard_record(f, kernel, t, {s, 4.0, opt.dealias}));
    out.trajectory.snapshots.push_back(f.to_physical());
  }
  return out;
}

/// Dispatches on cfg.integrator; Picard uses the step count implied by dt.
inline Trajectory solve(const SpectralField& psi0, const ConvolutionKernel& kernel, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.integrator == Integrator::strang) return evolve(psi0, kernel, cfg);
  PicardOptions opt;
  opt.steps = std::max<std::size_t>(1, cfg.steps());
  opt.max_iter = cfg.picard_max_iter;
  opt.s = cfg.hs_s;
  opt.dealias = cfg.dealias;
  return picard_solve(psi0, kernel, cfg.t_final, cfg.picard_tol, opt).trajectory;
}

}  // namespace bosonstar

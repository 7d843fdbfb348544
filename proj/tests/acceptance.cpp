// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "oracles.hpp"

using namespace bosonstar;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

ExperimentResult run_config(const std::string& file) {
  const auto cfg = load_config(std::string(BOSONSTAR_CONFIG_DIR) + "/" + file);
  return run_experiment(cfg);
}

// Every report of every listed config must pass; the detail names each report and its value.
Outcome configs(std::initializer_list<const char*> files) {
  bool ok = true;
  std::ostringstream os;
  for (const char* f : files) {
    const auto res = run_config(f);
    ok = ok && res.passed();
    for (const auto& r : res.reports) os << (r.pass ? "" : "!") << r.name << "=" << sci(r.fitted) << " ";
  }
  return {ok, os.str()};
}

SpectralField packet(const GridSpec& g, double amplitude, double width, double k) {
  return SpectralField::from_function(g, [&](const Vec3& x) {
    return amplitude * std::exp(-0.5 * norm2(x) / (width * width)) * std::polar(1.0, k * x[0]);
  });
}

Outcome unitarity_and_group_law() {
  const auto start = std::chrono::steady_clock::now();
  const auto g = GridSpec::cube(1, 4096, 100.0);
  const auto f = oracle::white_noise(g, 7);
  const auto a = free_propagate(f, 1.3);
  const double unitarity = std::abs(a.l2_norm() / f.l2_norm() - 1.0);
  const double group = oracle::rel_diff(free_propagate(a, 2.1), free_propagate(f, 3.4));
  const double inverse = oracle::rel_diff(free_propagate(a, -1.3), f);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << "unitarity=" << sci(unitarity) << " group=" << sci(group) << " inverse=" << sci(inverse)
     << " seconds=" << sci(secs);
  return {unitarity <= 1e-12 && group <= 1e-12 && inverse <= 1e-12 && secs < 5.0, os.str()};
}

Outcome gaussian_oracle() {
  const auto g = GridSpec::cube(1, 1024, 80.0);
  const double t = 10.0;
  const auto u = free_propagate(SpectralField::from_function(g, [](const Vec3& x) { return std::exp(-x[0] * x[0]); }), t);
  const double dxi = 0.1 * g.freq_spacing(0);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < g.points[0]; ++j) {
    const double x = g.coordinate(0, j);
    if (std::abs(x) > 0.25 * g.lengths[0]) continue;
    const cplx ref = oracle::free_gaussian(x, t, dxi, 16.0);
    num = std::max(num, std::abs(u[j] - ref));
    den = std::max(den, std::abs(ref));
  }
  return {num / den <= 1e-8, "relative_error=" + sci(num / den)};
}

Outcome multiplier_bounds() {
  double theta_max = 0.0, theta_min = 1.0, g0_max = 0.0;
  const double inv = 1.0 / std::sqrt(2.0);
  const std::vector<Vec3> dirs{{1, 0, 0}, {0, 1, 0}, {inv, inv, 0}, {0.6, -0.8, 0}};
  for (int d = 1; d <= 3; ++d) {
    for (double L : {5.0, 20.0, 80.0}) {
      const auto g = GridSpec::cube(d, d == 3 ? 32 : 128, L);
      for_each_mode(g, [&](std::size_t, const Vec3& xi) {
        const double th = theta_squared(xi);
        theta_max = std::max(theta_max, th);
        theta_min = std::min(theta_min, th);
      });
      for (const auto& n : dirs)
        if (d >= 2 || n[1] == 0.0) g0_max = std::max(g0_max, g0_symbol_max(g, n));
    }
  }
  const Vec3 n{0.6, 0.8, 0.0};
  double prev = 0.0;
  bool increasing = true;
  for (double lam : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double v = g0_symbol({lam * n[0], lam * n[1], 0.0}, n);
    increasing = increasing && v > prev;
    prev = v;
  }
  std::ostringstream os;
  os << "theta2_range=[" << sci(theta_min) << "," << sci(theta_max) << "] g0_max=" << sci(g0_max)
     << " g0_along_n=" << sci(prev);
  return {theta_min >= 0.0 && theta_max < 1.0 && g0_max <= 1.0 + 1e-12 && increasing && prev > 1.0 - 1e-6, os.str()};
}

Outcome roundtrip_decreasing() {
  const auto g = GridSpec::cube(1, 2048, 200.0);
  const auto k = build_kernel(PotentialSpec::yukawa(-0.1, 1.0), g);
  const auto psi = packet(g, 0.5, std::sqrt(2.0), 0.0);
  ScatteringConfig cfg;
  cfg.dt = 0.05;
  cfg.T_inf = 20.0;
  const double e20 = roundtrip(psi, k, cfg);
  cfg.T_inf = 40.0;
  const double e40 = roundtrip(psi, k, cfg);
  return {e20 <= 5e-3 && e40 <= 5e-3 && e40 < e20, "T20=" + sci(e20) + " T40=" + sci(e40)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"unitarity_group_law", unitarity_and_group_law},
      {"gaussian_oracle", gaussian_oracle},
      {"conservation", [] { return configs({"conservation.json"}); }},
      {"dispersive_exponents", [] { return configs({"free_decay_1d.json", "free_decay_2d.json"}); }},
      {"light_cone", [] { return configs({"kernel_lightcone.json"}); }},
      {"maximal_velocity", [] { return configs({"max_velocity.json"}); }},
      {"multiplier_bounds", multiplier_bounds},
      {"picard_contraction", [] { return configs({"picard_contraction.json"}); }},
      {"scattering_decay", [] { return configs({"scattering_decay.json"}); }},
      {"roundtrip", roundtrip_decreasing},
      {"phase_space_min_velocity", [] { return configs({"phase_space.json", "min_velocity.json"}); }},
      {"blowup_probe", [] { return configs({"blowup_probe.json"}); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

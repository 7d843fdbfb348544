#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace bosonstar;

namespace {

SpectralField packet(const GridSpec& g, double amplitude, double width = 2.0, double k = 0.5) {
  return SpectralField::from_function(g, [&](const Vec3& x) {
    return amplitude * std::exp(-0.5 * norm2(x) / (width * width)) * std::polar(1.0, k * x[0]);
  });
}

ScatteringConfig small_config(double T) {
  ScatteringConfig c;
  c.T_inf = T;
  c.dt = 0.05;
  return c;
}

}  // namespace

TEST(Scattering, FreeCaseIsIdentity) {
  const auto g = GridSpec::cube(1, 512, 100.0);
  const auto k = build_kernel(PotentialSpec::none(), g);
  const auto psi = packet(g, 1.0);
  const auto cfg = small_config(10.0);
  EXPECT_LT(relative_sup_difference(inverse_wave(psi, k, cfg).state, psi), 1e-14);
  EXPECT_LT(relative_sup_difference(wave_operator(psi, k, cfg).state, psi), 1e-14);
  EXPECT_LT(roundtrip(psi, k, cfg), 1e-13);
}

TEST(Scattering, InteractionPictureIsCauchy) {
  const auto g = GridSpec::cube(1, 2048, 200.0);
  const auto k = build_kernel(PotentialSpec::yukawa(-0.1, 1.0), g);
  const auto res = inverse_wave(packet(g, 0.5), k, small_config(40.0));
  for (std::size_t i = 1; i < res.times.size(); ++i)
    if (res.times[i] >= 20.0) EXPECT_LT(res.distance_l2[i], res.distance_l2[i - 1]) << "t=" << res.times[i];
  EXPECT_GT(res.tail_bound, 0.0);
  EXPECT_TRUE(std::isfinite(res.fitted_exponent));
}

TEST(Scattering, WaveOperatorDeviationLinearInCoupling) {
  const auto g = GridSpec::cube(1, 1024, 200.0);
  const auto plus = packet(g, 0.3);
  const auto cfg = small_config(20.0);
  const double s = cfg.sobolev_index(1);
  auto dev = [&](double kappa) {
    const auto k = build_kernel(PotentialSpec::yukawa(kappa, 1.0), g);
    const auto res = wave_operator(plus, k, cfg);
    for (std::size_t i = 1; i < res.ratios.size(); ++i) EXPECT_LT(res.ratios[i], 0.5);
    return hs_norm(res.state - plus, s) / hs_norm(plus, s);
  };
  const double a = dev(-0.1), b = dev(-0.05);
  EXPECT_GT(a / b, 1.7);
  EXPECT_LT(a / b, 2.3);
}

TEST(Scattering, RoundtripWithinBudget) {
  const auto g = GridSpec::cube(1, 2048, 200.0);
  const auto k = build_kernel(PotentialSpec::yukawa(-0.1, 1.0), g);
  const auto psi = packet(g, 0.5, std::sqrt(2.0), 0.0);
  const auto rep = roundtrip_report(psi, k, small_config(20.0));
  EXPECT_LT(rep.error, 5e-3);
  const double s = small_config(20.0).sobolev_index(1);
  EXPECT_LT(rep.error, (rep.forward.tail_bound + rep.backward.tail_bound) / hs_norm(psi, s) + 1e-8);
}

TEST(Scattering, ConfigValidation) {
  ScatteringConfig c;
  c.T_inf = -1.0;
  c.samples = 1;
  EXPECT_THROW(c.validate(), ConfigInvalid);
  const auto g = GridSpec::cube(1, 64, 20.0);
  const auto k = build_kernel(PotentialSpec::none(), GridSpec::cube(1, 64, 30.0));
  EXPECT_THROW(inverse_wave(packet(g, 1.0), k, small_config(1.0)), GridMismatch);
}

TEST(Scattering, WaveOperatorExpandsForLargeData) {
  const auto g = GridSpec::cube(1, 256, 40.0);
  const auto k = build_kernel(PotentialSpec::delta(-20.0), g);
  auto cfg = small_config(10.0);
  cfg.max_iter = 20;
  EXPECT_THROW(wave_operator(packet(g, 3.0, 1.0, 0.0), k, cfg), NoContraction);
}

TEST(MinVelocity, BandStateProperties) {
  const auto g = GridSpec::cube(1, 1024, 100.0);
  const auto k0 = build_kernel(PotentialSpec::none(), g);
  const auto seed = packet(g, 1.0, 1.0, 0.0);
  const auto st = build_min_velocity_state(seed, 0.4, 0.9, 0.5, k0, small_config(5.0));
  const double leak =
      velocity_calculus(st.psi_plus, [](double th) { return th >= 0.4 && th <= 1.0 ? 0.0 : 1.0; }).l2_norm();
  EXPECT_LE(leak, 1e-12);
  EXPECT_NEAR(st.psi_plus.l2_norm(), 0.5, 1e-12);
  EXPECT_LT(relative_sup_difference(st.psi0, st.psi_plus), 1e-14);

  const double n = seed.l2_norm();
  const auto whole = build_min_velocity_state(seed, 0.0, 1.0, n, k0, small_config(5.0));
  EXPECT_LT(relative_sup_difference(whole.psi_plus, seed), 1e-13);
}

TEST(MinVelocity, EmptyBandAndBadArguments) {
  const auto g = GridSpec::cube(1, 8, 2.0 * std::numbers::pi);
  const auto k0 = build_kernel(PotentialSpec::none(), g);
  const auto seed = packet(g, 1.0, 1.0, 0.0);
  EXPECT_THROW(build_min_velocity_state(seed, 0.1, 0.2, 1.0, k0, small_config(1.0)), EmptyBand);
  EXPECT_THROW(build_min_velocity_state(seed, 0.5, 0.4, 1.0, k0, small_config(1.0)), InvalidArgument);
}

TEST(MinVelocity, SlowRegionEmpties) {
  const auto g = GridSpec::cube(1, 4096, 200.0);
  const auto k = build_kernel(PotentialSpec::yukawa(-0.05, 1.0), g);
  const auto seed = packet(g, 1.0, 5.0, 1.55);
  const auto st = build_min_velocity_state(seed, 0.4, 0.9, 0.5, k, small_config(40.0));
  SolverConfig sc;
  sc.dt = 0.05;
  sc.t_final = 40.0;
  sc.snapshot_stride = 20;
  sc.store_fields = false;
  std::vector<double> t, b;
  evolve(st.psi0, k, sc, [&](double time, const SpectralField& psi, ObservableRecord&) {
    if (time < 10.0) return;
    t.push_back(time);
    b.push_back(velocity_band_mass(psi, time, 0.0, 0.3));
  });
  EXPECT_TRUE(strictly_decreasing(t, b, 10.0, 40.0));
}

TEST(Scattering, ReportJson) {
  const auto g = GridSpec::cube(1, 512, 100.0);
  const auto k = build_kernel(PotentialSpec::yukawa(-0.1, 1.0), g);
  const auto cfg = small_config(10.0);
  const auto j = to_report(inverse_wave(packet(g, 0.5), k, cfg), cfg);
  for (const char* key : {"residual_history", "tail_bound", "tail_exponent", "fitted_exponent", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["config"]["T_inf"], 10.0);
}

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace bosonstar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpectralField gaussian(const GridSpec& g, double width, Vec3 c = {}, Vec3 k = {}) {
  return SpectralField::from_function(g, [&](const Vec3& x) {
    Vec3 d{x[0] - c[0], x[1] - c[1], x[2] - c[2]};
    return std::exp(-0.5 * norm2(d) / (width * width)) * std::polar(1.0, dot(k, x));
  });
}

}  // namespace

TEST(Conserved, MassAndMomentumBasics) {
  const auto g = GridSpec::cube(1, 1024, 60.0);
  auto psi = gaussian(g, 1.5);
  psi = psi * cplx(1.0 / psi.l2_norm());
  EXPECT_NEAR(mass(psi), 1.0, 1e-10);
  EXPECT_LT(std::abs(momentum(psi)[0]), 1e-12);
  // A boosted packet carries momentum (1/2) k ||psi||^2 in this normalization.
  const auto boosted = gaussian(g, 3.0, {}, {0.8, 0, 0});
  EXPECT_NEAR(momentum(boosted)[0], 0.5 * 0.8 * mass(boosted), 1e-8);
}

TEST(Conserved, PlaneWaveEnergy) {
  const auto g = GridSpec::cube(2, 32, 10.0);
  const Vec3 xi = lattice_frequency(g, {2, -3, 0});
  const cplx c(0.3, 0.4);
  const auto pw = SpectralField::from_function(g, [&](const Vec3& x) { return c * std::polar(1.0, dot(xi, x)); });
  const auto k0 = build_kernel(PotentialSpec::none(), g);
  const double want = 0.5 * std::sqrt(1.0 + norm2(xi)) * std::norm(c) * g.volume();
  EXPECT_NEAR(energy(pw, k0) / want, 1.0, 1e-12);
  // Delta coupling on a constant-modulus wave adds (1/4) kappa |c|^4 |box|.
  const auto kd = build_kernel(PotentialSpec::delta(0.6), g);
  EXPECT_NEAR(interaction_energy(pw, kd) / (0.25 * 0.6 * std::pow(std::norm(c), 2) * g.volume()), 1.0, 1e-12);
}

TEST(Norms, SobolevAndLebesgue) {
  const auto g = GridSpec::cube(1, 512, 40.0);
  const auto psi = oracle::random_packets(g, 2);
  EXPECT_NEAR(hs_norm(psi, 0.0), psi.l2_norm(), 1e-12 * psi.l2_norm());
  EXPECT_GT(hs_norm(psi, 1.0), hs_norm(psi, 0.5));
  EXPECT_NEAR(lp_norm(psi, 2.0), psi.l2_norm(), 1e-12 * psi.l2_norm());
  double m = 0.0;
  const auto p = psi.to_physical();
  for (std::size_t i = 0; i < p.size(); ++i) m = std::max(m, std::abs(p[i]));
  EXPECT_EQ(linf_norm(psi), m);
  EXPECT_THROW(lp_norm(psi, 0.5), InvalidArgument);
}

TEST(Regions, MassBasics) {
  const auto g = GridSpec::cube(2, 64, 20.0);
  const auto psi = oracle::random_packets(g, 3);
  EXPECT_NEAR(region_mass(psi, Box{}), psi.l2_norm(), 1e-13);
  const auto bump = SpectralField::from_function(g, [](const Vec3& x) {
    const double r2 = norm2(x) / 4.0;
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  });
  EXPECT_EQ(region_mass(bump, Ball{{6.0, 0.0, 0.0}, 3.0}), 0.0);
  EXPECT_EQ(region_mass(bump, HalfSpace{{0.0, 1.0, 0.0}, 2.5}), 0.0);
  // Monotone under inclusion.
  double prev = 0.0;
  for (double r : {1.0, 2.0, 3.0, 5.0, 8.0}) {
    const double m = region_mass(psi, Ball{{0.5, -0.5, 0.0}, r});
    EXPECT_GE(m, prev);
    prev = m;
  }
  EXPECT_THROW(validate_region(Ball{{}, -1.0}), InvalidArgument);
  EXPECT_THROW(validate_region(HalfSpace{{1.0, 1.0, 0.0}, 0.0}), InvalidArgument);
}

TEST(Regions, BallMassMatchesQuadrature) {
  // With R halfway between grid points the sharp mask sums a midpoint rule on [-R, R].
  const auto g = GridSpec::cube(1, 8192, 40.0);
  const double h = g.spacing(0);
  const double R = (std::floor(2.0 / h) + 0.5) * h;
  const auto psi = SpectralField::from_function(g, [](const Vec3& x) { return std::exp(-0.5 * x[0] * x[0]); });
  const double got = region_mass(psi, Ball{{}, R});
  const double want = std::sqrt(std::numbers::pi) * std::erf(R);
  EXPECT_NEAR(got * got / want, 1.0, 1e-6);
}

TEST(Regions, Distances) {
  const ConvexRegion b1 = Ball{{0, 0, 0}, 1.0}, b2 = Ball{{5, 0, 0}, 1.0};
  EXPECT_EQ(region_distance(b1, b1), 0.0);
  EXPECT_DOUBLE_EQ(region_distance(b1, b2), 3.0);
  EXPECT_DOUBLE_EQ(region_distance(b1, HalfSpace{{0, 1, 0}, 4.0}), 3.0);
  EXPECT_DOUBLE_EQ(region_distance(HalfSpace{{0, 1, 0}, 4.0}, b1), 3.0);
  EXPECT_DOUBLE_EQ(region_distance(HalfSpace{{1, 0, 0}, 2.0}, HalfSpace{{-1, 0, 0}, 1.0}), 3.0);
  EXPECT_EQ(region_distance(HalfSpace{{1, 0, 0}, 2.0}, HalfSpace{{0, 1, 0}, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(region_distance(Box{{0, 0, -kInf}, {1, 1, kInf}}, Box{{4, 5, -kInf}, {6, 6, kInf}}), 5.0);
}

TEST(Regions, BoxBallDistanceMatchesSampling) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Box box{{2.0, -1.0, -0.5}, {4.0, 3.0, 0.5}};
  const Ball ball{{-1.0, 4.5, 0.2}, 1.2};
  const double exact = region_distance(ball, box);
  // Sample points of the ball, project onto the box, keep the smallest gap.
  double best = kInf;
  for (int i = 0; i < 200000; ++i) {
    Vec3 p{u(rng), u(rng), u(rng)};
    if (norm2(p) > 1.0) continue;
    for (auto& c : p) c *= ball.radius;
    for (int a = 0; a < 3; ++a) p[a] += ball.center[a];
    Vec3 q;
    for (int a = 0; a < 3; ++a) q[a] = std::clamp(p[a], box.lo[a], box.hi[a]);
    best = std::min(best, std::sqrt(norm2({p[0] - q[0], p[1] - q[1], p[2] - q[2]})));
  }
  EXPECT_LE(exact, best + 1e-12);
  EXPECT_NEAR(exact, best, 2e-2);
}

TEST(Regions, SeparatingFunctionalSplitsTheGap) {
  const std::vector<std::pair<ConvexRegion, ConvexRegion>> pairs{
      {Ball{{0, 0, 0}, 1.0}, Ball{{3, 4, 0}, 2.0}},
      {Ball{{0, 0, 0}, 1.0}, HalfSpace{{0.6, 0.8, 0}, 5.0}},
      {Box{{-1, -1, -kInf}, {1, 1, kInf}}, HalfSpace{{1, 0, 0}, 4.0}},
  };
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (const auto& [X, Y] : pairs) {
    const double D = region_distance(X, Y);
    const auto ell = separating_functional(X, Y);
    EXPECT_NEAR(norm2(ell.normal), 1.0, 1e-12);
    for (int i = 0; i < 20000; ++i) {
      const Vec3 x{u(rng), u(rng), 0.0};
      if (contains(X, x)) ASSERT_LE(ell(x), -0.5 * D + 1e-12);
      if (contains(Y, x)) ASSERT_GE(ell(x), 0.5 * D - 1e-12);
    }
  }
  EXPECT_THROW(separating_functional(Ball{{}, 1.0}, Ball{{1, 0, 0}, 1.0}), InvalidArgument);
}

TEST(ExpWeight, PointwiseBoundAndShift) {
  const auto g = GridSpec::cube(1, 1024, 40.0);
  const Vec3 n{1, 0, 0};
  const auto psi = gaussian(g, 0.7, {6.0, 0, 0});
  const auto cut = SpectralField::from_function(g, [](const Vec3& x) {
    return x[0] >= 3.0 ? std::exp(-0.5 * std::pow((x[0] - 6.0) / 0.7, 2)) : 0.0;
  });
  EXPECT_LE(exp_weight_norm(cut, n, {}, -1), std::exp(-3.0) * cut.l2_norm());
  const double delta = 1.7;
  for (int sign : {1, -1}) {
    const double a = exp_weight_norm(psi, n, {}, sign);
    const double b = exp_weight_norm(psi, n, {delta, 0, 0}, sign);
    EXPECT_NEAR(b / a, std::exp(-sign * delta), 1e-12);
  }
  EXPECT_THROW(exp_weight_norm(psi, n, {}, 0), InvalidArgument);
}

TEST(ExpWeight, CoshOracle) {
  // The packet must be narrow enough that the box edge does not break the reflection symmetry about x0.
  const auto g = GridSpec::cube(2, 64, 16.0);
  const auto psi = gaussian(g, 0.6, {1.0, -2.0, 0});
  const double inv = 1.0 / std::sqrt(2.0);
  const Vec3 n{inv, inv, 0};
  const Vec3 x0{1.0, -2.0, 0};
  const auto p = psi.to_physical();
  double acc = 0.0;
  for_each_point(g, [&](std::size_t i, const Vec3& x) {
    acc += std::cosh(2.0 * dot(n, {x[0] - x0[0], x[1] - x0[1], 0})) * std::norm(p[i]);
  });
  const double want = std::sqrt(acc * g.cell_volume());
  EXPECT_NEAR(exp_weight_norm(psi, n, x0, 1) / want, 1.0, 1e-12);
  EXPECT_NEAR(exp_weight_norm(psi, n, x0, -1) / want, 1.0, 1e-12);
}

TEST(ExpWeight, OverflowAndSlab) {
  const auto g = GridSpec::cube(1, 4096, 2000.0);
  const auto noise = oracle::white_noise(g, 1);
  EXPECT_THROW(exp_weight_norm(noise, {1, 0, 0}, {}, 1), OverflowRisk);
  EXPECT_TRUE(std::isfinite(log_exp_weight_norm(noise, {1, 0, 0}, {}, 1)));
  const double slab = exp_weight_norm(noise, {1, 0, 0}, {}, 1, 20.0);
  EXPECT_TRUE(std::isfinite(slab));
  EXPECT_LE(slab, std::exp(log_exp_weight_norm(noise, {1, 0, 0}, {}, 1)));
}

TEST(Velocity, BandMassBasics) {
  const auto g = GridSpec::cube(1, 2048, 100.0);
  const auto psi = oracle::random_packets(g, 7, 5, 10.0);
  EXPECT_NEAR(velocity_band_mass(psi, 3.0, 0.0, kInf), psi.l2_norm(), 1e-13);
  const auto cut = SpectralField::from_function(g, [&](const Vec3& x) {
    return std::abs(x[0]) > 25.0 ? std::exp(-0.5 * std::pow((x[0] - 30.0) / 0.5, 2)) : 0.0;
  });
  EXPECT_EQ(velocity_band_mass(cut, 10.0, 0.0, 0.25), 0.0);
  // Bands partitioning [0, inf) add up in squares to the mass.
  const std::vector<double> edges{0.0, 0.01, 0.1, 0.3, 0.7, 1.0, 2.5, kInf};
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double b = velocity_band_mass(psi, 20.0, edges[i], edges[i + 1]);
    acc += b * b;
  }
  EXPECT_NEAR(acc / mass(psi), 1.0, 1e-12);
  EXPECT_THROW(velocity_band_mass(psi, 0.0, 0.0, 1.0), InvalidArgument);
}

TEST(Velocity, BandMassMatchesQuadrature) {
  const auto g = GridSpec::cube(1, 8192, 40.0);
  const double h = g.spacing(0), t = 10.0;
  const double R = (std::floor(5.0 / h) + 0.5) * h;
  const auto psi = SpectralField::from_function(g, [](const Vec3& x) { return std::exp(-x[0] * x[0] / 32.0); });
  const double got = velocity_band_mass(psi, t, 0.0, (R / t) * (R / t));
  const double want = std::sqrt(16.0 * std::numbers::pi) * std::erf(R / 4.0);
  EXPECT_NEAR(got * got / want, 1.0, 1e-6);
}

TEST(Velocity, PositionThetaIdentity) {
  // ||x e^{-itK} psi||^2 = ||(x + t Theta) psi||^2.
  for (int d = 1; d <= 2; ++d) {
    const auto g = GridSpec::cube(d, d == 1 ? 2048 : 256, 120.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto psi = oracle::random_packets(g, seed);
      const double t = 7.5;
      const double lhs = position_theta_norm2(free_propagate(psi, t), 1.0, 0.0);
      const double rhs = position_theta_norm2(psi, 1.0, t);
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-9) << "d=" << d << " seed=" << seed;
    }
  }
}

TEST(Velocity, DefectDecaysLikeInverseSquare) {
  const auto g = GridSpec::cube(1, 4096, 200.0);
  const auto psi = gaussian(g, 2.0, {}, {1.0, 0, 0});
  std::vector<double> ts, vs;
  for (double t = 5.0; t <= 40.0; t += 2.5) {
    ts.push_back(t);
    vs.push_back(velocity_defect(free_propagate(psi, t), t));
  }
  EXPECT_NEAR(fit_power_law(ts, vs, 5.0, 40.0).exponent, -2.0, 0.3);
  EXPECT_THROW(velocity_defect(psi, -1.0), InvalidArgument);
}

TEST(PhaseSpace, ZeroCutoffsAndDenseOracle) {
  const auto g = GridSpec::cube(1, 128, 60.0);
  const auto psi = free_propagate(gaussian(g, 3.0, {}, {1.4, 0, 0}), 10.0);
  auto zero = [](double) { return 0.0; };
  auto one = [](double) { return 1.0; };
  EXPECT_EQ(phase_space_norm(psi, 10.0, zero, one), 0.0);
  EXPECT_EQ(phase_space_norm(psi, 10.0, one, zero), 0.0);

  const SmoothPlateau f{0.55, 0.75, 0.1};
  const SmoothPlateau gcut{-kInf, 0.1, 0.1};
  const double t = 10.0;
  const auto phys = psi.to_physical();
  std::vector<cplx> v(phys.values().begin(), phys.values().end());
  auto vh = oracle::dense_forward(g, v);
  for (std::size_t k = 0; k < vh.size(); ++k) {
    const double xi = g.wavenumber(0, k);
    vh[k] *= f(xi * xi / (1.0 + xi * xi));
  }
  auto w = oracle::dense_inverse(g, vh);
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double x = g.coordinate(0, j);
    acc += std::norm(gcut(x * x / (t * t)) * w[j]);
  }
  const double want = std::sqrt(acc * g.spacing(0));
  EXPECT_NEAR(phase_space_norm(psi, t, gcut, f) / want, 1.0, 1e-10);
}

TEST(PhaseSpace, FreePacketDecays) {
  const auto g = GridSpec::cube(1, 4096, 200.0);
  const auto psi0 = gaussian(g, 3.0, {}, {1.4, 0, 0});
  const SmoothPlateau f{0.55, 0.75, 0.1};
  const SmoothPlateau gcut{-kInf, 0.1, 0.1};
  double prev = kInf;
  for (double t : {10.0, 15.0, 20.0, 30.0}) {
    const double v = phase_space_norm(free_propagate(psi0, t), t, gcut, f);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Weighted, NormCases) {
  const auto g = GridSpec::cube(1, 4096, 80.0);
  const auto psi = oracle::random_packets(g, 9);
  EXPECT_NEAR(weighted_norm(psi, 0.0, 0.0), psi.l2_norm(), 1e-12 * psi.l2_norm());
  const auto bump = gaussian(g, 0.05, {10.0, 0, 0});
  EXPECT_NEAR(weighted_norm(bump, 1.0, 0.0) / bump.l2_norm(), std::sqrt(101.0), 1e-3);
  EXPECT_THROW(weighted_norm(psi, 3.0, 0.0), InvalidArgument);
  EXPECT_THROW(weighted_norm(psi, 1.0, -1.0), InvalidArgument);
}

TEST(Weighted, FreeGrowthAtMostLinear) {
  // ||<x> psi_t|| <= ||psi|| + ||x psi|| + t ||Theta psi||.
  const auto g = GridSpec::cube(1, 8192, 400.0);
  const auto psi = oracle::random_packets(g, 4);
  const double x0 = std::sqrt(position_theta_norm2(psi, 1.0, 0.0));
  const double th = std::sqrt(position_theta_norm2(psi, 0.0, 1.0));
  for (double t : {5.0, 20.0, 60.0}) {
    const double w = weighted_norm(free_propagate(psi, t), 1.0, 0.0);
    EXPECT_LE(w, psi.l2_norm() + x0 + 1.05 * t * th);
  }
}

TEST(Cutoffs, BumpAndPlateau) {
  const SmoothBump b{0.2, 0.6};
  EXPECT_DOUBLE_EQ(b(0.4), 1.0);
  EXPECT_EQ(b(0.2), 0.0);
  EXPECT_EQ(b(0.7), 0.0);
  EXPECT_GT(b(0.25), 0.0);
  const SmoothPlateau p{0.3, 0.5, 0.1};
  EXPECT_EQ(p(0.4), 1.0);
  EXPECT_EQ(p(0.19), 0.0);
  EXPECT_EQ(p(0.61), 0.0);
  EXPECT_GT(p(0.25), 0.0);
  EXPECT_LT(p(0.25), 1.0);
  EXPECT_EQ(p.support().first, 0.3 - 0.1);
  const SmoothPlateau open{-kInf, 0.1, 0.1};
  EXPECT_EQ(open(-5.0), 1.0);
}

TEST(Records, StandardColumnsAndCsv) {
  const auto g = GridSpec::cube(2, 32, 10.0);
  const auto psi = oracle::random_packets(g, 2);
  const auto rec = standard_record(psi, build_kernel(PotentialSpec::none(), g), 1.5);
  for (const char* c : {"mass", "energy", "momentum_1", "momentum_2", "Hs_norm", "Linf_norm", "Lp_norm"})
    EXPECT_TRUE(rec.has(c)) << c;
  EXPECT_FALSE(rec.has("momentum_3"));
  EXPECT_TRUE(rec.finite());
  EXPECT_THROW(rec.get("nope"), InvalidArgument);
  std::ostringstream os;
  write_records_csv(os, {rec, rec});
  const auto s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,mass,energy,momentum_1,momentum_2,Hs_norm,Linf_norm,Lp_norm");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}

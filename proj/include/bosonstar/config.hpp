#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonstar/dynamics.hpp"
#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"
#include "bosonstar/potentials.hpp"
#include "bosonstar/scattering.hpp"

namespace bosonstar {

using json = nlohmann::json;

/// Initial data: Gaussian exp(-|x-c|^2 / (2 w^2)), compact bump of radius w, or a
/// Gaussian modulated by exp(i k.x). `amplitude` is the peak value or, with
/// normalize = "l2", the L^2 norm.
struct InitialSpec {
  enum class Kind { gaussian, bump, modulated };
  Kind kind = Kind::gaussian;
  Vec3 center{};
  double width = 1.0;
  Vec3 k{};
  double amplitude = 1.0;
  bool normalize_l2 = false;
  double noise = 0.0;  // seeded smooth random perturbation, relative to the peak

  /// Radius beyond which the data is negligible (exactly zero for bumps).
  double support_radius() const {
    const double c = std::sqrt(norm2(center));
    return kind == Kind::bump ? c + width : c + 6.0 * width;
  }
};

inline SpectralField build_initial(const InitialSpec& spec, const GridSpec& grid, std::uint64_t seed = 0) {
  auto f = SpectralField::from_function(grid, [&](const Vec3& x) -> cplx {
    Vec3 d{x[0] - spec.center[0], x[1] - spec.center[1], x[2] - spec.center[2]};
    const double r2 = norm2(d) / (spec.width * spec.width);
    switch (spec.kind) {
      case InitialSpec::Kind::bump:
        return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
      case InitialSpec::Kind::modulated:
        return std::exp(-0.5 * r2) * std::polar(1.0, dot(spec.k, x));
      default:
        return std::exp(-0.5 * r2);
    }
  });
  if (spec.noise > 0.0) {
    // Smooth noise: white Gaussian coefficients under a unit-width Gaussian envelope.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto n = SpectralField::from_symbol(grid, [&](const Vec3& xi) {
      const double a = nd(rng), b = nd(rng);
      return cplx(a, b) * std::exp(-0.5 * norm2(xi));
    }).to_physical();
    const double peak = linf_norm(n);
    if (peak > 0.0) f = f + n * cplx(spec.noise / peak);
  }
  const double scale = spec.normalize_l2 ? spec.amplitude / f.l2_norm() : spec.amplitude;
  return f * cplx(scale);
}

/// Everything needed to run one experiment.
struct ExperimentConfig {
  std::string name;
  GridSpec grid = GridSpec::cube(1, 1024, 100.0);
  PotentialSpec potential = PotentialSpec::none();
  InitialSpec initial;
  SolverConfig solver;
  ScatteringConfig scattering;
  json params = json::object();  // experiment-specific knobs
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;

  template <class T>
  T param(const std::string& key, const T& fallback) const {
    return params.contains(key) ? params.at(key).get<T>() : fallback;
  }
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"free_decay",    "kernel_lightcone", "conservation",
                                              "max_velocity",  "scattering_decay", "phase_space",
                                              "min_velocity",  "blowup_probe",     "picard_contraction"};
  return names;
}

namespace detail {

inline Vec3 read_vec(const json& j, int dim) {
  Vec3 v{};
  if (j.is_number()) {
    v[0] = j.get<double>();
    return v;
  }
  for (int a = 0; a < dim && a < static_cast<int>(j.size()); ++a) v[a] = j.at(a).get<double>();
  return v;
}

inline void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& known,
                           std::vector<std::string>& bad) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) bad.push_back(section + "." + it.key() + ": unknown field");
}

template <class F>
void guarded(std::vector<std::string>& bad, const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigInvalid& e) {
    bad.insert(bad.end(), e.fields.begin(), e.fields.end());
  } catch (const std::exception& e) {
    bad.push_back(where + ": " + e.what());
  }
}

}  // namespace detail

/// Parses the JSON sections {grid, potential, initial, solver, scattering, experiment}.
inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> bad;
  if (!j.is_object()) throw ConfigInvalid({"config: top level must be an object"});
  detail::reject_unknown(j, "config", {"grid", "potential", "initial", "solver", "scattering", "experiment", "output_dir", "seed", "threads"}, bad);

  detail::guarded(bad, "experiment", [&] {
    if (!j.contains("experiment")) throw ConfigInvalid({"experiment: section is required"});
    const auto& e = j.at("experiment");
    if (!e.contains("name")) throw ConfigInvalid({"experiment.name: required"});
    cfg.name = e.at("name").get<std::string>();
    cfg.params = e;
    cfg.params.erase("name");
  });

  detail::guarded(bad, "grid", [&] {
    if (!j.contains("grid")) throw ConfigInvalid({"grid: section is required"});
    const auto& g = j.at("grid");
    detail::reject_unknown(g, "grid", {"dim", "n", "L"}, bad);
    const int d = g.at("dim").get<int>();
    if (d < 1 || d > 3) throw ConfigInvalid({"grid.dim: must be 1, 2 or 3"});
    std::array<std::size_t, 3> n{1, 1, 1};
    std::array<double, 3> len{1, 1, 1};
    for (int a = 0; a < d; ++a) {
      n[a] = g.at("n").is_array() ? g.at("n").at(a).get<std::size_t>() : g.at("n").get<std::size_t>();
      len[a] = g.at("L").is_array() ? g.at("L").at(a).get<double>() : g.at("L").get<double>();
    }
    cfg.grid = GridSpec::make(d, n, len);
  });

  detail::guarded(bad, "potential", [&] {
    if (j.contains("potential")) cfg.potential = j.at("potential").get<PotentialSpec>();
  });

  detail::guarded(bad, "initial", [&] {
    if (!j.contains("initial")) return;
    const auto& i = j.at("initial");
    detail::reject_unknown(i, "initial", {"type", "center", "width", "k", "amplitude", "normalize", "noise"}, bad);
    const auto type = i.value("type", std::string("gaussian"));
    if (type == "gaussian") cfg.initial.kind = InitialSpec::Kind::gaussian;
    else if (type == "bump") cfg.initial.kind = InitialSpec::Kind::bump;
    else if (type == "modulated") cfg.initial.kind = InitialSpec::Kind::modulated;
    else throw ConfigInvalid({"initial.type: expected gaussian, bump or modulated"});
    if (i.contains("center")) cfg.initial.center = detail::read_vec(i.at("center"), 3);
    if (i.contains("k")) cfg.initial.k = detail::read_vec(i.at("k"), 3);
    cfg.initial.width = i.value("width", 1.0);
    cfg.initial.amplitude = i.value("amplitude", 1.0);
    cfg.initial.noise = i.value("noise", 0.0);
    const auto norm = i.value("normalize", std::string("peak"));
    if (norm != "peak" && norm != "l2") throw ConfigInvalid({"initial.normalize: expected peak or l2"});
    cfg.initial.normalize_l2 = norm == "l2";
    if (!(cfg.initial.width > 0.0)) throw ConfigInvalid({"initial.width: must be positive"});
  });

  detail::guarded(bad, "solver", [&] {
    if (!j.contains("solver")) return;
    const auto& s = j.at("solver");
    detail::reject_unknown(s, "solver", {"dt", "t_final", "integrator", "picard_tol", "picard_max_iter", "snapshot_stride",
                                         "dealias", "blowup_factor", "hs_s", "lp"}, bad);
    auto& c = cfg.solver;
    c.dt = s.value("dt", c.dt);
    c.t_final = s.value("t_final", c.t_final);
    const auto integ = s.value("integrator", std::string("strang"));
    if (integ == "strang") c.integrator = Integrator::strang;
    else if (integ == "picard") c.integrator = Integrator::picard;
    else throw ConfigInvalid({"solver.integrator: expected strang or picard"});
    c.picard_tol = s.value("picard_tol", c.picard_tol);
    c.picard_max_iter = s.value("picard_max_iter", c.picard_max_iter);
    c.snapshot_stride = s.value("snapshot_stride", c.snapshot_stride);
    c.dealias = s.value("dealias", c.dealias);
    c.blowup_factor = s.value("blowup_factor", c.blowup_factor);
    c.hs_s = s.value("hs_s", c.hs_s);
    c.lp = s.value("lp", c.lp);
  });

  detail::guarded(bad, "scattering", [&] {
    if (!j.contains("scattering")) return;
    const auto& s = j.at("scattering");
    detail::reject_unknown(s, "scattering", {"T_inf", "dt", "tail_estimate", "tol", "max_iter", "s", "dealias", "samples", "fit_start"}, bad);
    auto& c = cfg.scattering;
    c.T_inf = s.value("T_inf", c.T_inf);
    c.dt = s.value("dt", c.dt);
    c.tail_estimate = s.value("tail_estimate", c.tail_estimate);
    c.tol = s.value("tol", c.tol);
    c.max_iter = s.value("max_iter", c.max_iter);
    c.s = s.value("s", c.s);
    c.dealias = s.value("dealias", c.dealias);
    c.samples = s.value("samples", c.samples);
    c.fit_start = s.value("fit_start", c.fit_start);
  });

  detail::guarded(bad, "config", [&] {
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
  });

  if (!bad.empty()) throw ConfigInvalid(bad);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalid({std::string("config: malformed JSON: ") + e.what()});
  }
  return parse_config(j);
}

}  // namespace bosonstar

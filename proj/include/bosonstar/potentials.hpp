#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bosonstar/errors.hpp"
#include "bosonstar/field.hpp"

namespace bosonstar {

// Interaction potentials w. Coupling sign convention: kappa < 0 is attractive
// (focusing), kappa > 0 repulsive (defocusing).

struct DeltaPotential {
  double kappa = 0.0;
};

/// kappa e^{-mu|x|} / |x|.
struct YukawaPotential {
  double kappa = 0.0;
  double mu = 1.0;
};

/// kappa e^{-|x|^2 / (2 sigma^2)}.
struct GaussianPotential {
  double kappa = 0.0;
  double sigma = 1.0;
};

/// kappa max(|x|, rho)^{-alpha}; rho <= 0 means one grid spacing.
struct PowerLawPotential {
  double kappa = 0.0;
  double alpha = 1.0;
  double core = 0.0;
};

struct PotentialSpec;

/// Sum of potentials; the empty sum is w = 0.
struct SumPotential {
  std::vector<PotentialSpec> terms;
};

struct PotentialSpec {
  std::variant<DeltaPotential, YukawaPotential, GaussianPotential, PowerLawPotential, SumPotential> term;

  static PotentialSpec none() { return {SumPotential{}}; }
  static PotentialSpec delta(double kappa) { return {DeltaPotential{kappa}}; }
  static PotentialSpec yukawa(double kappa, double mu) { return {YukawaPotential{kappa, mu}}; }
  static PotentialSpec gaussian(double kappa, double sigma) { return {GaussianPotential{kappa, sigma}}; }
  static PotentialSpec power_law(double kappa, double alpha, double core = 0.0) {
    return {PowerLawPotential{kappa, alpha, core}};
  }
  static PotentialSpec sum(std::vector<PotentialSpec> terms) { return {SumPotential{std::move(terms)}}; }

  bool is_zero() const;
  void validate(int dim) const;
};

inline bool PotentialSpec::is_zero() const {
  return std::visit(
      [](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SumPotential>) {
          return std::all_of(p.terms.begin(), p.terms.end(), [](const PotentialSpec& s) { return s.is_zero(); });
        } else {
          return p.kappa == 0.0;
        }
      },
      term);
}

inline void PotentialSpec::validate(int dim) const {
  std::visit(
      [dim](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, YukawaPotential>) {
          if (!(p.mu > 0.0)) throw InvalidArgument("yukawa mu must be positive");
        } else if constexpr (std::is_same_v<T, GaussianPotential>) {
          if (!(p.sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
        } else if constexpr (std::is_same_v<T, PowerLawPotential>) {
          if (!(p.alpha > 0.0 && p.alpha < dim))
            throw InvalidArgument("power-law alpha must lie in (0, d)");
          if (p.core < 0.0) throw InvalidArgument("power-law core radius must be positive");
        } else if constexpr (std::is_same_v<T, SumPotential>) {
          for (const auto& s : p.terms) s.validate(dim);
        }
      },
      term);
}

/// Function-space class of a potential, used to pick decay predictions.
struct PotentialClass {
  enum class Kind { zero, measure, integrable, weak_lebesgue, mixed };
  Kind kind = Kind::zero;
  double q_min = 1.0;        // smallest q with w in M + L^q
  double weak_exponent = 0;  // d/alpha for power laws
  std::string description;
};

inline PotentialClass classify(const PotentialSpec& spec, int dim) {
  using K = PotentialClass::Kind;
  return std::visit(
      [dim](const auto& p) -> PotentialClass {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeltaPotential>) {
          return {K::measure, 1.0, 0.0, "finite measure (M part)"};
        } else if constexpr (std::is_same_v<T, YukawaPotential>) {
          return {K::integrable, 1.0, 0.0, "M cap L^q for 1 <= q < d"};
        } else if constexpr (std::is_same_v<T, GaussianPotential>) {
          return {K::integrable, 1.0, 0.0, "M cap L^q for all q"};
        } else if constexpr (std::is_same_v<T, PowerLawPotential>) {
          const double q = dim / p.alpha;
          return {K::weak_lebesgue, q, q, "L^{d/alpha,infty} + L^infty with d/alpha = " + std::to_string(q)};
        } else {
          if (p.terms.empty()) return {K::zero, 1.0, 0.0, "zero"};
          PotentialClass out{K::mixed, 1.0, 0.0, "sum:"};
          for (const auto& t : p.terms) {
            const auto c = classify(t, dim);
            out.q_min = std::max(out.q_min, c.q_min);
            out.weak_exponent = std::max(out.weak_exponent, c.weak_exponent);
            out.description += " [" + c.description + "]";
          }
          if (p.terms.size() == 1) {
            auto single = classify(p.terms.front(), dim);
            return single;
          }
          return out;
        }
      },
      spec.term);
}

/// Unitary Fourier symbol of w sampled on the lattice, plus the convolution
/// factors (2 pi)^{d/2} w_hat with and without the 2/3 dealiasing mask.
struct ConvolutionKernel {
  GridSpec grid;
  std::vector<double> symbol;
  std::vector<double> factor;           // (2 pi)^{d/2} symbol
  std::vector<double> factor_dealiased;  // factor with |k_a| > n_a/3 zeroed
  bool zero = true;
  bool sampled = false;  // symbol obtained by transforming grid samples

  const std::vector<double>& convolution_factor(bool dealias) const { return dealias ? factor_dealiased : factor; }
};

/// Closed-form unitary symbol of the Yukawa kernel; only available in d = 3.
inline double yukawa_closed_form_symbol(const YukawaPotential& p, int dim, const Vec3& xi) {
  if (dim != 3) throw UnsupportedDimension("closed-form Yukawa symbol exists only in d = 3");
  return std::pow(2.0 * std::numbers::pi, -1.5) * 4.0 * std::numbers::pi * p.kappa / (norm2(xi) + p.mu * p.mu);
}

namespace detail {

inline double default_core(const GridSpec& g) {
  double h = g.spacing(0);
  for (int a = 1; a < g.dim; ++a) h = std::max(h, g.spacing(a));
  return h;
}

/// Physical-space profile of a function-type potential (no delta parts).
inline double sample_profile(const PotentialSpec& spec, const GridSpec& g, double r) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeltaPotential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, YukawaPotential>) {
          return p.kappa * std::exp(-p.mu * r) / std::max(r, default_core(g));
        } else if constexpr (std::is_same_v<T, GaussianPotential>) {
          return p.kappa * std::exp(-r * r / (2.0 * p.sigma * p.sigma));
        } else if constexpr (std::is_same_v<T, PowerLawPotential>) {
          const double core = p.core > 0.0 ? p.core : default_core(g);
          return p.kappa * std::pow(std::max(r, core), -p.alpha);
        } else {
          double s = 0.0;
          for (const auto& t : p.terms) s += sample_profile(t, g, r);
          return s;
        }
      },
      spec.term);
}

inline std::vector<double> sampled_symbol(const GridSpec& g, const PotentialSpec& spec) {
  std::vector<cplx> w(g.size());
  for_each_point(g, [&](std::size_t i, const Vec3& x) { w[i] = sample_profile(spec, g, std::sqrt(norm2(x))); });
  forward_transform(g, w);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i].real();
  return out;
}

inline void accumulate_symbol(const PotentialSpec& spec, const GridSpec& g, std::vector<double>& sym, bool& sampled) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeltaPotential>) {
          const double c = p.kappa * std::pow(2.0 * std::numbers::pi, -0.5 * g.dim);
          for (auto& s : sym) s += c;
        } else if constexpr (std::is_same_v<T, YukawaPotential>) {
          if (g.dim == 3) {
            for_each_mode(g, [&](std::size_t i, const Vec3& xi) { sym[i] += yukawa_closed_form_symbol(p, 3, xi); });
          } else {
            const auto s = sampled_symbol(g, spec);
            for (std::size_t i = 0; i < sym.size(); ++i) sym[i] += s[i];
            sampled = true;
          }
        } else if constexpr (std::is_same_v<T, GaussianPotential>) {
          const double amp = p.kappa * std::pow(p.sigma, g.dim);
          for_each_mode(g, [&](std::size_t i, const Vec3& xi) {
            sym[i] += amp * std::exp(-0.5 * p.sigma * p.sigma * norm2(xi));
          });
        } else if constexpr (std::is_same_v<T, PowerLawPotential>) {
          const auto s = sampled_symbol(g, spec);
          for (std::size_t i = 0; i < sym.size(); ++i) sym[i] += s[i];
          sampled = true;
        } else {
          for (const auto& t : p.terms) accumulate_symbol(t, g, sym, sampled);
        }
      },
      spec.term);
}

inline bool inside_two_thirds(const GridSpec& g, std::size_t i0, std::size_t i1, std::size_t i2) {
  const std::size_t idx[3] = {i0, i1, i2};
  for (int a = 0; a < g.dim; ++a) {
    const long cut = static_cast<long>(g.points[a]) / 3;
    if (std::abs(g.mode(a, idx[a])) > cut) return false;
  }
  return true;
}

}  // namespace detail

inline ConvolutionKernel build_kernel(const PotentialSpec& spec, const GridSpec& grid) {
  spec.validate(grid.dim);
  ConvolutionKernel k;
  k.grid = grid;
  k.symbol.assign(grid.size(), 0.0);
  detail::accumulate_symbol(spec, grid, k.symbol, k.sampled);
  k.zero = spec.is_zero();
  const double c = std::pow(2.0 * std::numbers::pi, 0.5 * grid.dim);
  k.factor.resize(grid.size());
  k.factor_dealiased.resize(grid.size());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < grid.points[0]; ++i)
    for (std::size_t j = 0; j < grid.points[1]; ++j)
      for (std::size_t l = 0; l < grid.points[2]; ++l, ++idx) {
        k.factor[idx] = c * k.symbol[idx];
        k.factor_dealiased[idx] = detail::inside_two_thirds(grid, i, j, l) ? k.factor[idx] : 0.0;
      }
  return k;
}

namespace detail {

/// V = w * |psi|^2 from physical samples; scratch is resized as needed.
inline void hartree_into(const ConvolutionKernel& kernel, std::span<const cplx> psi, bool dealias,
                         std::vector<double>& out, std::vector<cplx>& scratch) {
  const auto& g = kernel.grid;
  out.assign(g.size(), 0.0);
  if (kernel.zero) return;
  scratch.resize(g.size());
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = std::norm(psi[i]);
  forward_transform(g, scratch);
  const auto& f = kernel.convolution_factor(dealias);
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] *= f[i];
  inverse_transform(g, scratch);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scratch[i].real();
}

}  // namespace detail

/// Hartree potential w * |psi|^2 as a real physical-space field.
inline SpectralField hartree_potential(const SpectralField& psi, const ConvolutionKernel& kernel, bool dealias = true) {
  if (!(psi.grid() == kernel.grid)) throw GridMismatch();
  const auto phys = psi.to_physical();
  std::vector<double> v;
  std::vector<cplx> scratch;
  detail::hartree_into(kernel, phys.values(), dealias, v, scratch);
  std::vector<cplx> out(v.begin(), v.end());
  return SpectralField(psi.grid(), std::move(out), Representation::physical);
}

/// Size of w in M + L^q: |kappa| for delta terms, grid L^q norms for the rest,
/// summed over terms.
inline double potential_norm(const PotentialSpec& spec, const GridSpec& grid, double q = 1.0) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeltaPotential>) {
          return std::abs(p.kappa);
        } else if constexpr (std::is_same_v<T, SumPotential>) {
          double s = 0.0;
          for (const auto& t : p.terms) s += potential_norm(t, grid, q);
          return s;
        } else {
          double s = 0.0;
          for_each_point(grid, [&](std::size_t, const Vec3& x) {
            s += std::pow(std::abs(detail::sample_profile(spec, grid, std::sqrt(norm2(x)))), q);
          });
          return std::pow(s * grid.cell_volume(), 1.0 / q);
        }
      },
      spec.term);
}

// ---- JSON: tagged records such as {"type":"yukawa","kappa":-0.5,"mu":1.0} ----

inline void to_json(nlohmann::json& j, const PotentialSpec& spec) {
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DeltaPotential>) {
          j = {{"type", "delta"}, {"kappa", p.kappa}};
        } else if constexpr (std::is_same_v<T, YukawaPotential>) {
          j = {{"type", "yukawa"}, {"kappa", p.kappa}, {"mu", p.mu}};
        } else if constexpr (std::is_same_v<T, GaussianPotential>) {
          j = {{"type", "gaussian"}, {"kappa", p.kappa}, {"sigma", p.sigma}};
        } else if constexpr (std::is_same_v<T, PowerLawPotential>) {
          j = {{"type", "power_law"}, {"kappa", p.kappa}, {"alpha", p.alpha}, {"core", p.core}};
        } else {
          if (p.terms.empty()) {
            j = {{"type", "none"}};
          } else {
            j = {{"type", "sum"}, {"terms", nlohmann::json::array()}};
            for (const auto& t : p.terms) j["terms"].push_back(t);
          }
        }
      },
      spec.term);
}

inline void from_json(const nlohmann::json& j, PotentialSpec& spec) {
  if (!j.is_object() || !j.contains("type")) throw InvalidArgument("potential must be an object with a \"type\"");
  const auto type = j.at("type").get<std::string>();
  auto num = [&j](const char* key, double fallback) { return j.contains(key) ? j.at(key).get<double>() : fallback; };
  auto need = [&j, &type](const char* key) {
    if (!j.contains(key)) throw InvalidArgument("potential \"" + type + "\" requires \"" + key + "\"");
    return j.at(key).get<double>();
  };
  if (type == "none" || type == "zero") {
    spec = PotentialSpec::none();
  } else if (type == "delta") {
    spec = PotentialSpec::delta(need("kappa"));
  } else if (type == "yukawa") {
    spec = PotentialSpec::yukawa(need("kappa"), need("mu"));
  } else if (type == "gaussian") {
    spec = PotentialSpec::gaussian(need("kappa"), need("sigma"));
  } else if (type == "power_law") {
    spec = PotentialSpec::power_law(need("kappa"), need("alpha"), num("core", 0.0));
  } else if (type == "sum") {
    std::vector<PotentialSpec> terms;
    for (const auto& t : j.at("terms")) terms.push_back(t.get<PotentialSpec>());
    spec = PotentialSpec::sum(std::move(terms));
  } else {
    throw InvalidArgument("unknown potential type \"" + type + "\"");
  }
}

}  // namespace bosonstar

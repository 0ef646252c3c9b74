#pragma once

// Reproductions of the quantitative predictions: closed-form identities, norm
// scaling, growth exponents of the sharpness families, boundedness ratios, and
// the key-lemma checks. Every report derives its pass flag from its tolerances.

#include <besovbilin/bilinear.hpp>
#include <besovbilin/norms.hpp>
#include <besovbilin/parallel.hpp>
#include <besovbilin/symbol_lib.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace besovbilin {

struct ExperimentRecord {
  std::string label;
  /// Sweep index (j, R, |Lambda| or k1 depending on the experiment).
  int j = 0;
  double output_norm = 0.0;
  std::vector<double> input_norms;
  double ratio = 0.0;
};

struct ExperimentReport {
  std::string name;
  std::vector<ExperimentRecord> records;
  std::optional<double> slope;
  std::optional<double> intercept;
  std::optional<double> residual;
  std::optional<double> expected;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;
  std::map<std::string, double> metrics;
};

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// max |log2(value) - (slope j + intercept)|
  double residual = 0.0;
};

/// Least-squares fit of log2(value) against j.
inline GrowthFit fit_growth_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InvalidArgument("growth fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [j, v] : points) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("growth fit needs finite positive values");
    sx += j;
    sy += std::log2(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [j, v] : points) {
    sxx += (j - mx) * (j - mx);
    sxy += (j - mx) * (std::log2(v) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("growth fit needs at least two distinct j");
  GrowthFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [j, v] : points)
    fit.residual = std::max(fit.residual, std::abs(std::log2(v) - (fit.slope * j + fit.intercept)));
  return fit;
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double spread(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (values.empty() || !(*lo > 0.0)) return kInf;
  return *hi / *lo;
}

inline std::vector<double> record_ratios(const ExperimentReport& r) {
  std::vector<double> v;
  for (const auto& rec : r.records) v.push_back(rec.ratio);
  return v;
}

inline void check_j_range(const GridSpec& grid, int j_min, int j_max, std::size_t min_points) {
  if (j_max < j_min || static_cast<std::size_t>(j_max - j_min + 1) < min_points)
    throw InvalidArgument("j range [" + std::to_string(j_min) + ", " + std::to_string(j_max) + "] needs at least " +
                          std::to_string(min_points) + " points");
  if (j_min < 4) throw InvalidArgument("j sweeps start at j >= 4 (bump must sit inside one annulus plateau)");
  if (j_max > max_symbol_band(grid))
    throw InvalidArgument("j_max = " + std::to_string(j_max) + " exceeds the grid capacity " +
                          std::to_string(max_symbol_band(grid)));
}

/// e^{i 2^j x_1} on the lattice (2^j P must be an integer).
inline std::vector<cplx> lattice_modulation(const GridSpec& grid, int j) {
  const double m_real = std::ldexp(grid.period_scale, j);
  const long m = std::lround(m_real);
  if (std::abs(m_real - static_cast<double>(m)) > 1e-9)
    throw InvalidArgument("modulation 2^j is not a lattice frequency on " + describe(grid));
  const LatticePhase phase(grid);
  const auto n = static_cast<std::size_t>(grid.dimension);
  std::vector<std::size_t> axes(n);
  std::vector<cplx> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    grid.unflatten(k, axes);
    out[k] = phase.axis(axes[0], m);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form identities

struct ClosedFormOptions {
  int j_min = 5;
  int j_max = 8;
  /// Dyadic range of the symbols; j outside it must give T == 0.
  int k_min = 5;
  int k_max = 8;
  std::vector<double> mixed_orders{-0.5, -0.25};
  double tolerance = 1e-6;
  double max_seconds_per_j = 10.0;
};

/// Def-symbol on (f_{1,j}, f_{2,j}) against 2^{-jn/2}(F^{-1}phi)^2, and the mixed
/// symbol on (f_1, f_{2,j}) against 2^{j m2} e^{i 2^j x_1}(F^{-1}phi)^2.
inline ExperimentReport run_closed_form_check(const GridSpec& grid, const ClosedFormOptions& opt = {}) {
  detail::Stopwatch total;
  grid.validate();
  if (opt.j_max < opt.j_min || opt.j_min < 4) throw InvalidArgument("closed-form check needs 4 <= j_min <= j_max");
  if (opt.j_max > max_symbol_band(grid)) throw InvalidArgument("closed-form j_max exceeds grid capacity");
  const Symbol def = make_sharpness_symbol_hormander(opt.k_min, opt.k_max, grid);
  const SampledField low = make_low_bump(grid);
  ExperimentReport report;
  report.name = "closed-form";
  report.tolerance = opt.tolerance;
  report.notes.push_back("symbols use k in [" + std::to_string(opt.k_min) + ", " + std::to_string(opt.k_max) +
                         "] on " + describe(grid));
  bool ok = true;
  double worst_runtime = 0.0;
  for (int j = opt.j_min; j <= opt.j_max; ++j) {
    detail::Stopwatch clock;
    const bool in_range = j >= opt.k_min && j <= opt.k_max;
    const SampledField f1j = make_modulated_bump(grid, j, -1);
    const SampledField f2j = make_modulated_bump(grid, j, 1);
    const SampledField T = apply_bilinear_separable(def, f1j, f2j);
    std::vector<cplx> ref(grid.size());
    const double scale = std::pow(2.0, -0.5 * j * grid.dimension);
    for (std::size_t k = 0; k < ref.size(); ++k) ref[k] = in_range ? scale * low.values[k] * low.values[k] : 0.0;
    double err;
    if (in_range) {
      err = max_relative_error(T.values, ref);
    } else {
      err = 0.0;
      for (const auto& v : T.values) err = std::max(err, std::abs(v));
    }
    const double seconds = clock.seconds();
    worst_runtime = std::max(worst_runtime, seconds);
    ok = ok && err <= opt.tolerance && seconds <= opt.max_seconds_per_j;
    report.records.push_back({"def-symbol", j, err, {lp_norm(f1j, 2.0), lp_norm(f2j, 2.0)}, err});

    const auto modulation = in_range ? detail::lattice_modulation(grid, j) : std::vector<cplx>();
    for (double m2 : opt.mixed_orders) {
      const Symbol mixed = make_sharpness_symbol_mixed(m2, opt.k_min, opt.k_max, grid);
      const SampledField Tm = apply_bilinear_separable(mixed, low, f2j);
      double e;
      if (in_range) {
        std::vector<cplx> mref(grid.size());
        const double c = std::pow(2.0, j * m2);
        for (std::size_t k = 0; k < mref.size(); ++k) mref[k] = c * modulation[k] * low.values[k] * low.values[k];
        e = max_relative_error(Tm.values, mref);
      } else {
        e = 0.0;
        for (const auto& v : Tm.values) e = std::max(e, std::abs(v));
      }
      ok = ok && e <= opt.tolerance;
      report.records.push_back({"mixed m2=" + std::to_string(m2), j, e, {lp_norm(low, 2.0), lp_norm(f2j, 2.0)}, e});
    }
  }
  report.metrics["max_seconds_per_j"] = worst_runtime;
  report.pass = ok;
  report.runtime_seconds = total.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Norm parameters

struct NormSpec {
  enum class Kind { besov, sobolev } kind = Kind::besov;
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;

  static NormSpec besov(double s, double p, double q) { return {Kind::besov, s, p, q}; }
  static NormSpec sobolev(double s, double p) { return {Kind::sobolev, s, p, 2.0}; }

  double operator()(const SampledField& f) const {
    if (kind == Kind::sobolev) return sobolev_norm(f, SobolevParams{s, p});
    return besov_norm(f, BesovParams{s, p, q, std::nullopt});
  }

  std::string describe() const {
    if (kind == Kind::sobolev) return "L^" + std::to_string(p) + "_" + std::to_string(s);
    return "B^" + std::to_string(s) + "_{" + std::to_string(p) + "," + std::to_string(q) + "}";
  }
};

/// ||f_{2,j}|| / 2^{js} across the sweep; pass when max/min <= 1 + tolerance.
inline ExperimentReport run_norm_scaling(const GridSpec& grid, int j_min, int j_max, const NormSpec& norm,
                                         double tolerance = 0.05) {
  detail::Stopwatch clock;
  detail::check_j_range(grid, j_min, j_max, 2);
  ExperimentReport report;
  report.name = "norm-scaling " + norm.describe();
  report.tolerance = tolerance;
  report.expected = norm.s;
  const auto count = static_cast<std::size_t>(j_max - j_min + 1);
  report.records.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const int j = j_min + static_cast<int>(i);
    const double v = norm(make_modulated_bump(grid, j, 1));
    report.records[i] = {"f2j", j, v, {}, v / std::pow(2.0, j * norm.s)};
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : report.records) pts.emplace_back(r.j, r.output_norm);
  if (pts.size() >= 3) {
    const GrowthFit fit = fit_growth_exponent(pts);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.residual = fit.residual;
  }
  const double sp = detail::spread(detail::record_ratios(report));
  report.metrics["ratio_spread"] = sp;
  report.pass = sp <= 1.0 + tolerance;
  report.runtime_seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Sharpness sweeps

enum class SymbolFamily { def_symbol, product, mixed, identity };

struct SymbolDescriptor {
  SymbolFamily family = SymbolFamily::def_symbol;
  int k_min = kSharpnessKMin;
  int k_max = kSharpnessKMin;
  double m1 = -0.25;
  double m2 = -0.25;

  Symbol build(const GridSpec& grid) const {
    switch (family) {
      case SymbolFamily::product: return make_sharpness_symbol_product(m1, m2, k_min, k_max, grid);
      case SymbolFamily::mixed: return make_sharpness_symbol_mixed(m2, k_min, k_max, grid);
      case SymbolFamily::identity: return make_identity_symbol();
      default: return make_sharpness_symbol_hormander(k_min, k_max, grid);
    }
  }

  std::string name() const {
    switch (family) {
      case SymbolFamily::product: return "product";
      case SymbolFamily::mixed: return "mixed";
      case SymbolFamily::identity: return "identity";
      default: return "def-symbol";
    }
  }
};

/// Input pairs of the sharpness constructions.
enum class InputFamily {
  /// (F^{-1}phi, f_{2,j})
  low_high,
  /// (f_{1,j}, f_{2,j})
  diagonal,
  /// (f_{2,j}, F^{-1}phi), the Kato-Ponce control ordering
  high_low,
  /// (random band-limited near 0, random with spectrum in [2^j - 1, 2^j + 1])
  random,
};

inline std::string to_string(InputFamily f) {
  switch (f) {
    case InputFamily::diagonal: return "diagonal";
    case InputFamily::high_low: return "high-low";
    case InputFamily::random: return "random";
    default: return "low-high";
  }
}

inline std::pair<SampledField, SampledField> make_input_pair(const GridSpec& grid, InputFamily family, int j,
                                                             std::uint64_t seed) {
  switch (family) {
    case InputFamily::diagonal: return {make_modulated_bump(grid, j, -1), make_modulated_bump(grid, j, 1)};
    case InputFamily::high_low: return {make_modulated_bump(grid, j, 1), make_low_bump(grid)};
    case InputFamily::random: {
      const double c = std::ldexp(1.0, j);
      std::vector<double> lo(static_cast<std::size_t>(grid.dimension), -1.0), hi(lo.size(), 1.0);
      lo[0] = c - 1.0;
      hi[0] = c + 1.0;
      return {make_random_band_limited(grid, 2.0, seed), make_random_spectral_box(grid, lo, hi, seed + 1)};
    }
    default: return {make_low_bump(grid), make_modulated_bump(grid, j, 1)};
  }
}

struct SweepConfig {
  std::string name = "sharpness";
  SymbolDescriptor symbol;
  InputFamily inputs = InputFamily::low_high;
  NormSpec output = NormSpec::besov(0.0, 2.0, 2.0);
  int j_min = 5;
  int j_max = 8;
  GridSpec grid;
  /// Derived from the family when absent.
  std::optional<double> expected_exponent;
  double tolerance = 0.1;
  double residual_tolerance = 0.1;
  std::uint64_t seed = 1;
};

/// Growth exponent predicted for a sweep configuration.
inline double predicted_exponent(const SweepConfig& c) {
  if (c.expected_exponent) return *c.expected_exponent;
  const double half_n = 0.5 * c.grid.dimension;
  if (c.inputs == InputFamily::diagonal && c.symbol.family == SymbolFamily::def_symbol) return -half_n;
  if (c.inputs == InputFamily::low_high || c.inputs == InputFamily::random) {
    if (c.symbol.family == SymbolFamily::def_symbol) return c.output.s - half_n;
    if (c.symbol.family == SymbolFamily::mixed) return c.output.s + c.symbol.m2;
  }
  throw InvalidArgument("no predicted exponent for symbol '" + c.symbol.name() + "' with inputs '" +
                        to_string(c.inputs) + "'; set expected_exponent");
}

inline ExperimentReport run_sharpness_sweep(const SweepConfig& config) {
  detail::Stopwatch clock;
  config.grid.validate();
  detail::check_j_range(config.grid, config.j_min, config.j_max, 4);
  if (!(config.tolerance > 0.0) || !(config.residual_tolerance > 0.0))
    throw InvalidArgument("sweep tolerances must be positive");
  const Symbol sigma = config.symbol.build(config.grid);
  ExperimentReport report;
  report.name = config.name;
  report.tolerance = config.tolerance;
  report.expected = predicted_exponent(config);
  report.seed = config.seed;
  report.notes.push_back(config.symbol.name() + " k in [" + std::to_string(config.symbol.k_min) + ", " +
                         std::to_string(config.symbol.k_max) + "], inputs " + to_string(config.inputs) +
                         ", output " + config.output.describe());
  const auto count = static_cast<std::size_t>(config.j_max - config.j_min + 1);
  report.records.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const int j = config.j_min + static_cast<int>(i);
    const auto [f1, f2] = make_input_pair(config.grid, config.inputs, j, config.seed + 2 * i);
    const double out = config.output(apply_bilinear(sigma, f1, f2));
    report.records[i] = {to_string(config.inputs), j, out, {lp_norm(f1, 2.0), lp_norm(f2, 2.0)}, out};
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : report.records) pts.emplace_back(r.j, r.output_norm);
  const GrowthFit fit = fit_growth_exponent(pts);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.residual = fit.residual;
  report.metrics["residual_tolerance"] = config.residual_tolerance;
  // A slope fitted to round-off says nothing: some output must clear 1e-10 ||f1||_2 ||f2||_2.
  double signal = 0.0;
  for (const auto& r : report.records)
    signal = std::max(signal, r.output_norm / (r.input_norms[0] * r.input_norms[1]));
  report.metrics["relative_output"] = signal;
  const bool resolved = signal > 1e-10;
  if (!resolved) report.notes.push_back("output is at round-off level; the symbol misses the input spectra");
  report.pass = resolved && std::abs(fit.slope - *report.expected) <= config.tolerance &&
                fit.residual <= config.residual_tolerance;
  report.runtime_seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Boundedness probe

struct BoundednessConfig {
  std::string name = "boundedness";
  SymbolDescriptor symbol;
  double s1 = 0.0, s2 = 0.0;
  double p1 = 2.0, p2 = 2.0;
  double q1 = 4.0, q2 = 4.0;
  /// Output B^s_{p,q}; s must equal s1 + s2.
  double s = 0.0, p = 2.0, q = 2.0;
  std::vector<InputFamily> families{InputFamily::low_high, InputFamily::diagonal, InputFamily::random};
  int j_min = 5;
  int j_max = 8;
  GridSpec grid;
  /// Uniformity bound max/min for admissible tuples.
  double max_spread = 4.0;
  /// Required growth R(j_max)/R(j_min) for inadmissible tuples.
  double min_growth = 2.0;
  std::uint64_t seed = 1;
};

inline double inverse_exponent(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// Exponent relations required of every tuple.
inline void validate_exponents(const BoundednessConfig& c) {
  auto bad = [](const std::string& what) { throw InvalidArgument("exponent relation violated: " + what); };
  if (!(c.p >= 1.0 && c.p <= 2.0)) bad("1 <= p <= 2");
  if (!(c.p1 >= 2.0 && c.p2 >= 2.0)) bad("p1, p2 >= 2");
  if (!(c.q > 0.0 && c.q1 > 0.0 && c.q2 > 0.0)) bad("q, q1, q2 > 0");
  if (inverse_exponent(c.p) > inverse_exponent(c.p1) + inverse_exponent(c.p2) + 1e-12) bad("1/p <= 1/p1 + 1/p2");
  if (std::abs(inverse_exponent(c.q) - inverse_exponent(c.q1) - inverse_exponent(c.q2)) > 1e-12)
    bad("1/q = 1/q1 + 1/q2");
  if (std::abs(c.s - c.s1 - c.s2) > 1e-12) bad("s = s1 + s2");
}

/// Whether the tuple lies in the bounded regime for the symbol's class
/// (with s~_i = s_i): s_i below the class threshold and s > -n/2. For sigma == 1
/// the Kato-Ponce control regime s = s1 > 0, s2 = 0 is used instead.
inline bool admissible(const BoundednessConfig& c) {
  if (c.symbol.family == SymbolFamily::identity) return c.s > 0.0 && c.s2 == 0.0;
  const double half_n = 0.5 * c.grid.dimension;
  double t1 = half_n, t2 = half_n;
  if (c.symbol.family == SymbolFamily::product) {
    t1 = c.symbol.m1 + half_n;
    t2 = c.symbol.m2 + half_n;
  }
  return c.s1 < t1 && c.s2 < t2 && c.s > -half_n;
}

/// R(j) = ||T(f1, f2)||_{B^s_{p,q}} / (||f1||_{B^{s1}_{p1,q1}} ||f2||_{B^{s2}_{p2,q2}}) per family.
/// Admissible tuples pass when every family has max/min <= max_spread; inadmissible
/// tuples pass when the diagonal family grows by at least min_growth.
inline ExperimentReport run_boundedness_probe(const BoundednessConfig& config) {
  detail::Stopwatch clock;
  config.grid.validate();
  validate_exponents(config);
  detail::check_j_range(config.grid, config.j_min, config.j_max, 2);
  if (config.families.empty()) throw InvalidArgument("boundedness probe needs at least one input family");
  const Symbol sigma = config.symbol.build(config.grid);
  const bool ok_regime = admissible(config);
  ExperimentReport report;
  report.name = config.name;
  report.seed = config.seed;
  report.tolerance = ok_regime ? config.max_spread : config.min_growth;
  report.notes.push_back(std::string(ok_regime ? "admissible" : "inadmissible") + " tuple (s1,s2)=(" +
                         std::to_string(config.s1) + "," + std::to_string(config.s2) + "), symbol " +
                         config.symbol.name());
  const BesovParams out{config.s, config.p, config.q, std::nullopt};
  const BesovParams in1{config.s1, config.p1, config.q1, std::nullopt};
  const BesovParams in2{config.s2, config.p2, config.q2, std::nullopt};
  const auto per_family = static_cast<std::size_t>(config.j_max - config.j_min + 1);
  report.records.resize(per_family * config.families.size());
  parallel_for(report.records.size(), [&](std::size_t i) {
    const InputFamily fam = config.families[i / per_family];
    const int j = config.j_min + static_cast<int>(i % per_family);
    const auto [f1, f2] = make_input_pair(config.grid, fam, j, config.seed + 2 * i);
    const double num = besov_norm(apply_bilinear(sigma, f1, f2), out);
    const double a = besov_norm(f1, in1), b = besov_norm(f2, in2);
    report.records[i] = {to_string(fam), j, num, {a, b}, num / (a * b)};
  });
  bool pass = true;
  for (std::size_t fi = 0; fi < config.families.size(); ++fi) {
    const auto first = report.records.begin() + static_cast<long>(fi * per_family);
    std::vector<double> ratios;
    for (auto it = first; it != first + static_cast<long>(per_family); ++it) ratios.push_back(it->ratio);
    const std::string fam = to_string(config.families[fi]);
    const double sp = detail::spread(ratios);
    const double growth = ratios.back() / ratios.front();
    report.metrics[fam + ".spread"] = sp;
    report.metrics[fam + ".growth"] = growth;
    if (ok_regime) {
      pass = pass && sp <= config.max_spread;
    } else if (config.families[fi] == InputFamily::diagonal) {
      pass = pass && growth >= config.min_growth;
    }
  }
  if (!ok_regime &&
      std::find(config.families.begin(), config.families.end(), InputFamily::diagonal) == config.families.end())
    throw InvalidArgument("inadmissible tuples are probed with the diagonal family");
  report.pass = pass;
  report.runtime_seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Key-lemma checks

struct LemmaOptions {
  GridSpec grid;
  std::uint64_t seed = 7;
  /// Square function: radii, exponent pairs (p, p~), band of the random input.
  std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
  std::vector<std::pair<double, double>> exponent_pairs{{2.0, 2.0}, {2.0, 4.0}};
  double square_band = 16.0;
  double square_max_spread = 4.0;
  /// Pointwise bound: band range and symbol range.
  int band_min = 4;
  int band_max = 7;
  int symbol_k_min = 3;
  int symbol_k_max = 8;
  double pointwise_max_spread = 10.0;
  /// Lattice sums: band K = (k, k), lattice sizes, spread of the broad inputs (cells).
  int lattice_band = 7;
  std::vector<int> lattice_sizes{1, 4, 16, 64};
  int broad_cells = 40;
  double lattice_max_spread = 4.0;
};

/// Square-function ratio across R for each (p, p~).
inline std::vector<ExperimentReport> run_square_function_check(const LemmaOptions& opt) {
  std::vector<ExperimentReport> out;
  const SampledField f = make_random_band_limited(opt.grid, opt.square_band, opt.seed);
  for (const auto& [p, pt] : opt.exponent_pairs) {
    detail::Stopwatch clock;
    ExperimentReport r;
    r.name = "square-function p=" + std::to_string(p) + " pt=" + std::to_string(pt);
    r.tolerance = opt.square_max_spread;
    r.seed = opt.seed;
    for (double R : opt.radii) {
      const SquareFunctionReport s = square_function_check(f, R, p, pt);
      r.records.push_back({"R", static_cast<int>(R), s.square_norm, {s.normalizer}, s.ratio});
      r.metrics["pointwise_constant R=" + std::to_string(static_cast<int>(R))] = s.pointwise_constant;
    }
    const double sp = detail::spread(detail::record_ratios(r));
    r.metrics["ratio_spread"] = sp;
    r.pass = sp <= opt.square_max_spread;
    r.runtime_seconds = clock.seconds();
    out.push_back(std::move(r));
  }
  return out;
}

/// Pointwise domination of j = 0 pieces by S(f1) S(f2) across bands.
/// Hormander family: def-symbol, k1 <= k2 (the cutoff in xi1 vanishes beyond
/// 2 * 2^{k2}). Product family: (m1, m2) = (-1/4, -1/4), k2 <= k1.
inline std::vector<ExperimentReport> run_pointwise_bound_check(const LemmaOptions& opt) {
  const GridSpec& grid = opt.grid;
  std::vector<ExperimentReport> out;
  struct Variant {
    std::string name;
    Symbol sigma;
    ClassSpec cls;
    bool k1_le_k2;
  };
  const std::vector<Variant> variants{
      {"pointwise def-symbol", make_sharpness_symbol_hormander(opt.symbol_k_min, opt.symbol_k_max, grid),
       ClassSpec::hormander(-0.5 * grid.dimension), true},
      {"pointwise product", make_sharpness_symbol_product(-0.25, -0.25, opt.symbol_k_min, opt.symbol_k_max, grid),
       ClassSpec::product(-0.25, -0.25), false}};
  const auto n = static_cast<std::size_t>(grid.dimension);
  for (const auto& v : variants) {
    detail::Stopwatch clock;
    ExperimentReport r;
    r.name = v.name;
    r.tolerance = opt.pointwise_max_spread;
    for (int k1 = opt.band_min; k1 <= opt.band_max; ++k1)
      for (int k2 = opt.band_min; k2 <= opt.band_max; ++k2) {
        if (v.k1_le_k2 ? k1 > k2 : k2 > k1) continue;
        std::vector<long> nu1(n, 0), nu2(n, 0);
        nu1[0] = -(1L << k1);
        nu2[0] = 1L << k2;
        const SymbolPiece piece = decompose_symbol(v.sigma, grid, 0, {k1, k2}, nu1, nu2);
        const SampledField f1 = make_modulated_bump(grid, k1, -1);
        const SampledField f2 = make_modulated_bump(grid, k2, 1);
        const PointwiseBoundReport b = pointwise_bound_check(piece, f1, f2, v.cls, 0.0);
        r.records.push_back({"k=(" + std::to_string(k1) + "," + std::to_string(k2) + ")", k1, b.max_ratio,
                             {b.weight_exponent, static_cast<double>(k2)}, b.max_ratio});
      }
    const double sp = detail::spread(detail::record_ratios(r));
    r.metrics["ratio_spread"] = sp;
    r.pass = sp <= opt.pointwise_max_spread;
    r.runtime_seconds = clock.seconds();
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {

/// Integer cells nu whose window phi(. - nu) meets the support of F (n = 1).
inline std::vector<long> occupied_cells(const SpectralField& F) {
  const GridSpec& grid = F.grid;
  long lo = std::numeric_limits<long>::max(), hi = std::numeric_limits<long>::min();
  for (std::size_t i = 0; i < F.values.size(); ++i) {
    if (F.values[i] == cplx(0.0)) continue;
    const long m = grid.signed_index(i);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  std::vector<long> cells;
  if (lo > hi) return cells;
  const long c_lo = static_cast<long>(std::floor(static_cast<double>(lo) / grid.period_scale)) - 1;
  const long c_hi = static_cast<long>(std::ceil(static_cast<double>(hi) / grid.period_scale)) + 1;
  for (long c = c_lo; c <= c_hi; ++c) cells.push_back(c);
  return cells;
}

/// |<T_{sigma_{0,K,nu}}(f1, f2), g>| by the spectral pairing on the cell boxes.
inline double piece_pairing(const Symbol& sigma, const GridSpec& grid, std::array<int, 2> K, long nu1, long nu2,
                            const SpectralField& F1, const SpectralField& F2, const SpectralField& G) {
  const long a[1] = {nu1};
  const long b[1] = {nu2};
  const SymbolPiece piece = decompose_symbol(sigma, grid, 0, K, a, b);
  if (piece.zero) return 0.0;
  return std::abs(trilinear_pairing_spectral(std::get<XIndependentSampled>(piece.symbol.representation()), F1, F2, G));
}

}  // namespace detail

/// Lattice-sum scaling: for each of the three sums, C = sum / (2^{w}|Lambda|^{1/2}
/// ||f1|| ||f2|| ||g||) with p1 = p2 = r = 2 and inputs adapted to Lambda. n = 1.
inline std::vector<ExperimentReport> run_lattice_sum_check(const LemmaOptions& opt) {
  const GridSpec& grid = opt.grid;
  if (grid.dimension != 1) throw InvalidArgument("lattice-sum check supports n = 1 only");
  // 1 - 1/p1 - 1/p2 <= 1/r <= 1/2 with p1 = p2 = r = 2.
  const double p1 = 2.0, p2 = 2.0, r_exp = 2.0;
  if (!(1.0 - 1.0 / p1 - 1.0 / p2 <= 1.0 / r_exp && 1.0 / r_exp <= 0.5))
    throw InvalidArgument("lattice-sum exponents violate 1 - 1/p1 - 1/p2 <= 1/r <= 1/2");
  const int k = opt.lattice_band;
  const Symbol sigma = make_sharpness_symbol_hormander(opt.symbol_k_min, opt.symbol_k_max, grid);
  const ClassSpec cls = ClassSpec::hormander(-0.5);
  const double weight = std::pow(2.0, cls.band_weight_exponent(k, k));
  // Plateau region of the k-th terms in both slots.
  const long base = std::lround(0.86 * std::ldexp(1.0, k));
  const long broad_hi = base + opt.broad_cells;
  const int max_size = *std::max_element(opt.lattice_sizes.begin(), opt.lattice_sizes.end());
  if ((base + broad_hi + max_size + 8) >= grid.nyquist())
    throw InvalidArgument("lattice-sum configuration exceeds Nyquist on " + describe(grid));

  auto box = [&](double lo, double hi, std::uint64_t seed) {
    const double l[1] = {lo};
    const double h[1] = {hi};
    return forward_transform(make_random_spectral_box(grid, l, h, seed));
  };
  auto norm2 = [](const SpectralField& F) { return lp_norm(inverse_transform(F), 2.0); };

  std::vector<ExperimentReport> out;
  for (int which = 1; which <= 3; ++which) {
    detail::Stopwatch clock;
    ExperimentReport r;
    r.name = "lattice-sum " + std::to_string(which);
    r.tolerance = opt.lattice_max_spread;
    r.seed = opt.seed;
    for (std::size_t si = 0; si < opt.lattice_sizes.size(); ++si) {
      const int size = opt.lattice_sizes[si];
      if (size < 1) throw InvalidArgument("lattice sizes must be >= 1");
      const std::uint64_t seed = opt.seed + 10 * si + 100 * static_cast<std::uint64_t>(which);
      const double broad_lo = static_cast<double>(base) - 0.5, broad_up = static_cast<double>(broad_hi) + 0.5;
      // Lambda = [lam, lam + size - 1].
      long lam = base;
      SpectralField F1 = SpectralField::zeros(grid), F2 = F1, G = F1;
      if (which == 1) {
        F1 = box(lam - 0.5, lam + size - 0.5, seed);
        F2 = box(broad_lo, broad_up, seed + 1);
        G = box(lam + base - 5.0, lam + size + broad_hi + 5.0, seed + 2);
      } else if (which == 2) {
        F1 = box(broad_lo, broad_up, seed);
        F2 = box(lam - 0.5, lam + size - 0.5, seed + 1);
        G = box(lam + base - 5.0, lam + size + broad_hi + 5.0, seed + 2);
      } else {
        lam = base + broad_hi - size / 2;
        F1 = box(broad_lo, broad_up, seed);
        F2 = box(broad_lo, broad_up, seed + 1);
        G = box(lam - 0.5, lam + size - 0.5, seed + 2);
      }
      const auto cells1 = detail::occupied_cells(F1);
      const auto cells2 = detail::occupied_cells(F2);
      std::vector<std::pair<long, long>> terms;
      for (long a : cells1)
        for (long b : cells2) {
          const bool in1 = a >= lam && a < lam + size;
          const bool in2 = b >= lam && b < lam + size;
          const bool in3 = a + b >= lam && a + b < lam + size;
          if ((which == 1 && in1) || (which == 2 && in2) || (which == 3 && in3)) terms.emplace_back(a, b);
        }
      std::vector<double> values(terms.size());
      parallel_for(terms.size(), [&](std::size_t t) {
        values[t] = detail::piece_pairing(sigma, grid, {k, k}, terms[t].first, terms[t].second, F1, F2, G);
      });
      double sum = 0.0;
      for (double v : values) sum += v;
      const double a = norm2(F1), b = norm2(F2), c = norm2(G);
      const double C = sum / (weight * std::sqrt(static_cast<double>(size)) * a * b * c);
      r.records.push_back({"|Lambda|", size, sum, {a, b, c}, C});
    }
    const double sp = detail::spread(detail::record_ratios(r));
    r.metrics["ratio_spread"] = sp;
    r.pass = sp <= opt.lattice_max_spread;
    r.runtime_seconds = clock.seconds();
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ExperimentReport> run_lemma_checks(const LemmaOptions& opt) {
  opt.grid.validate();
  if (opt.grid.dimension != 1) throw InvalidArgument("lemma checks run on n = 1 grids");
  std::vector<ExperimentReport> all = run_square_function_check(opt);
  for (auto& r : run_pointwise_bound_check(opt)) all.push_back(std::move(r));
  for (auto& r : run_lattice_sum_check(opt)) all.push_back(std::move(r));
  return all;
}

// ---------------------------------------------------------------------------
// Infrastructure checks usable from the command line

/// Brute-force, x-independent and separable paths on seeded random separable
/// symbols and band-limited inputs.
inline ExperimentReport run_path_agreement(const GridSpec& grid, int instances, std::uint64_t seed,
                                           double tolerance = 1e-10) {
  detail::Stopwatch clock;
  ExperimentReport r;
  r.name = "path-agreement";
  r.tolerance = tolerance;
  r.seed = seed;
  bool ok = true;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = seed + 3 * static_cast<std::uint64_t>(i);
    const double band = 0.25 * grid.nyquist();
    const Symbol sigma(make_random_separable(1 + i % 4, band, s));
    const SampledField f1 = make_random_band_limited(grid, band, s + 1);
    const SampledField f2 = make_random_band_limited(grid, band, s + 2);
    const SampledField a = apply_bilinear_bruteforce(sigma, f1, f2);
    const SampledField b = apply_bilinear_xindep(sigma, f1, f2);
    const SampledField c = apply_bilinear_separable(sigma, f1, f2);
    const double e = std::max({max_relative_error(a.values, c.values), max_relative_error(b.values, c.values),
                               max_relative_error(a.values, b.values)});
    ok = ok && e <= tolerance;
    r.records.push_back({"instance", i, e, {}, e});
  }
  r.pass = ok;
  r.runtime_seconds = clock.seconds();
  return r;
}

/// 2^{-1/2} ||f||_2 <= ||f||_{B^0_{2,2}} <= ||f||_2 on seeded random fields.
inline ExperimentReport run_besov_sandwich(const GridSpec& grid, int instances, std::uint64_t seed,
                                           double slack = 1e-12) {
  detail::Stopwatch clock;
  ExperimentReport r;
  r.name = "besov-sandwich";
  r.tolerance = slack;
  r.seed = seed;
  int violations = 0;
  for (int i = 0; i < instances; ++i) {
    const double band = std::ldexp(1.0, 1 + i % 8);
    const SampledField f = make_random_band_limited(grid, std::min(band, grid.nyquist()), seed + static_cast<std::uint64_t>(i));
    const double l2 = lp_norm(f, 2.0);
    const double b = besov_norm(f, BesovParams{0.0, 2.0, 2.0, std::nullopt});
    if (b < std::sqrt(0.5) * l2 * (1.0 - slack) || b > l2 * (1.0 + slack)) ++violations;
    r.records.push_back({"instance", i, b, {l2}, b / l2});
  }
  r.metrics["violations"] = violations;
  r.pass = violations == 0;
  r.runtime_seconds = clock.seconds();
  return r;
}

struct SupportLawOptions {
  GridSpec grid{1, 128, 2.0};
  /// Box of the base symbol: indices [-M/2, M/2).
  std::size_t box = 24;
  /// x-band of the base symbol.
  double x_band = 8.0;
  int pieces = 20;
  double tolerance = 1e-10;
  double control_floor = 1e-3;
  std::uint64_t seed = 11;
};

/// Leakage of decomposition pieces of a random x-dependent symbol outside
/// nu1 + nu2 + [-2^{j+2}, 2^{j+2}]^n, with the shrunk box 2^{j+1} as control.
/// Every piece must stay below `tolerance`. The shrunk-box law is refuted when
/// some piece leaks more than `control_floor` outside the shrunk box.
inline ExperimentReport run_support_law_check(const SupportLawOptions& opt) {
  detail::Stopwatch clock;
  const GridSpec& grid = opt.grid;
  grid.validate();
  if (grid.dimension != 1) throw InvalidArgument("support-law check supports n = 1 only");
  const LatticeBox box = LatticeBox::centered(grid, opt.box);
  const Symbol sigma(make_random_general_symbol(grid, box, box, opt.x_band, opt.seed));
  const double half = 0.5 * static_cast<double>(opt.box) / grid.period_scale;
  const SampledField f1 = make_random_band_limited(grid, half, opt.seed + 1);
  const SampledField f2 = make_random_band_limited(grid, half, opt.seed + 2);
  ExperimentReport r;
  r.name = "support-law";
  r.tolerance = opt.tolerance;
  r.seed = opt.seed;
  double worst = 0.0, control = 0.0;
  std::array<double, 3> weakest_by_j{kInf, kInf, kInf};
  int index = 0;
  const long reach = static_cast<long>(std::floor(half)) - 1;
  // Pieces are spread evenly over j = 0, 1, 2.
  for (int j = 0; j <= 2; ++j) {
    const int quota = (opt.pieces * (j + 1)) / 3;
    for (long a = -reach; a <= reach && index < quota; a += 2)
      for (long b = reach; b >= -reach && index < quota; b -= 3) {
        auto band_of = [](long v) {
          const double m = std::abs(static_cast<double>(v));
          return m < 1.5 ? 0 : static_cast<int>(std::lround(std::log2(m)));
        };
        const long nu1[1] = {a};
        const long nu2[1] = {b};
        const SymbolPiece piece = decompose_symbol(sigma, grid, j, {band_of(a), band_of(b)}, nu1, nu2);
        if (piece.zero) continue;
        const LeakageReport law = support_check(piece, f1, f2);
        if (law.total_mass == 0.0) continue;
        const LeakageReport shrunk = support_check(piece, f1, f2, std::ldexp(1.0, j + 1));
        worst = std::max(worst, law.leakage);
        control = std::max(control, shrunk.leakage);
        auto& weakest = weakest_by_j[static_cast<std::size_t>(j)];
        weakest = std::min(weakest, shrunk.leakage);
        r.records.push_back({"j=" + std::to_string(j) + " nu=(" + std::to_string(a) + "," + std::to_string(b) + ")",
                             j, law.leakage, {law.total_mass}, shrunk.leakage});
        ++index;
      }
  }
  r.metrics["max_leakage"] = worst;
  // Per-piece control leakage falls off with j: psi_j and phi are both flat near
  // the edges that would have to overlap.
  r.metrics["control_leakage"] = control;
  for (int j = 0; j < 3; ++j)
    r.metrics["min_control_leakage j=" + std::to_string(j)] = weakest_by_j[static_cast<std::size_t>(j)];
  r.metrics["pieces"] = index;
  r.pass = index == opt.pieces && worst <= opt.tolerance && control > opt.control_floor;
  r.runtime_seconds = clock.seconds();
  return r;
}

}  // namespace besovbilin

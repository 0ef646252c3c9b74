#pragma once

// Symbols and test functions of the sharpness constructions, seeded random
// inputs, and finite-difference seminorm tables for the two symbol classes.

#include <besovbilin/bilinear.hpp>
#include <besovbilin/grid_fourier.hpp>
#include <besovbilin/symbol_class.hpp>
#include <besovbilin/windows.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace besovbilin {

/// Lower end of the dyadic sums in the sharpness symbols. Grids too coarse to
/// resolve 2^10 take an explicit k_min aligned with the j sweep instead.
inline constexpr int kSharpnessKMin = 10;

/// Largest k usable in a dyadic sum on this grid: floor(log2(Nyquist)) - 1.
inline int max_symbol_band(const GridSpec& grid) {
  return static_cast<int>(std::floor(std::log2(grid.nyquist()))) - 1;
}

inline void check_band_range(int k_min, int k_max, const GridSpec& grid) {
  grid.validate();
  if (k_min < 1 || k_max < k_min)
    throw InvalidArgument("symbol band range needs 1 <= k_min <= k_max, got [" + std::to_string(k_min) + ", " +
                          std::to_string(k_max) + "]");
  if (k_max > max_symbol_band(grid))
    throw InvalidArgument("k_max = " + std::to_string(k_max) + " exceeds log2(Nyquist) - 1 = " +
                          std::to_string(max_symbol_band(grid)) + " on " + describe(grid));
}

/// sum_k 2^{m k} psi_ann(2^{-k} xi) over [k_min, k_max].
inline ScalarWindow make_dyadic_annulus_sum(double m, int k_min, int k_max) {
  const ScalarWindow annulus = make_sharpness_windows().annulus;
  std::vector<std::pair<double, ScalarWindow>> terms;
  for (int k = k_min; k <= k_max; ++k) terms.emplace_back(std::pow(2.0, m * k), ScalarWindow::dyadic_rescale(annulus, k));
  return ScalarWindow::combination(terms);
}

/// sigma(xi1, xi2) = sum_k 2^{-kn/2} cutoff(2^{-k} xi1) annulus(2^{-k} xi2).
inline Symbol make_sharpness_symbol_hormander(int k_min, int k_max, const GridSpec& grid) {
  check_band_range(k_min, k_max, grid);
  const SharpnessWindows w = make_sharpness_windows();
  SeparableSum sum;
  for (int k = k_min; k <= k_max; ++k)
    sum.terms.push_back({std::pow(2.0, -0.5 * k * grid.dimension), ScalarWindow::dyadic_rescale(w.cutoff, k),
                         ScalarWindow::dyadic_rescale(w.annulus, k)});
  return Symbol(std::move(sum));
}

/// sigma = (sum_k1 2^{m1 k1} annulus(2^{-k1} xi1)) (sum_k2 2^{m2 k2} annulus(2^{-k2} xi2)).
inline Symbol make_sharpness_symbol_product(double m1, double m2, int k_min, int k_max, const GridSpec& grid) {
  check_band_range(k_min, k_max, grid);
  if (!std::isfinite(m1) || !std::isfinite(m2)) throw InvalidArgument("product symbol orders must be finite");
  SeparableSum sum;
  sum.terms.push_back({1.0, make_dyadic_annulus_sum(m1, k_min, k_max), make_dyadic_annulus_sum(m2, k_min, k_max)});
  return Symbol(std::move(sum));
}

/// sigma = cutoff(xi1) sum_k2 2^{m2 k2} annulus(2^{-k2} xi2).
inline Symbol make_sharpness_symbol_mixed(double m2, int k_min, int k_max, const GridSpec& grid) {
  check_band_range(k_min, k_max, grid);
  if (!std::isfinite(m2)) throw InvalidArgument("mixed symbol order must be finite");
  SeparableSum sum;
  sum.terms.push_back({1.0, make_sharpness_windows().cutoff, make_dyadic_annulus_sum(m2, k_min, k_max)});
  return Symbol(std::move(sum));
}

/// sigma == 1, for which T(f1, f2) = f1 f2.
inline Symbol make_identity_symbol() {
  SeparableSum sum;
  sum.terms.push_back({1.0, ScalarWindow::one(), ScalarWindow::one()});
  return Symbol(std::move(sum));
}

/// Field whose spectrum is `window` sampled on the lattice.
inline SampledField field_from_spectrum(const GridSpec& grid, const ScalarWindow& window) {
  grid.validate();
  SpectralField spec = SpectralField::zeros(grid);
  for_each_frequency(grid, [&](std::size_t i, std::span<const double> xi) { spec.values[i] = window(xi); });
  return inverse_transform(spec);
}

/// F^{-1} phi for the sharpness bump phi.
inline SampledField make_low_bump(const GridSpec& grid) {
  return field_from_spectrum(grid, make_sharpness_windows().bump);
}

/// Field with spectrum phi(xi - sign 2^j e_1): sign = -1 gives f_{1,j}, +1 gives f_{2,j}.
inline SampledField make_modulated_bump(const GridSpec& grid, int j, int sign) {
  grid.validate();
  if (sign != 1 && sign != -1) throw InvalidArgument("modulated bump sign must be +1 or -1");
  if (j < 0) throw InvalidArgument("modulated bump needs j >= 0");
  if (!(std::ldexp(1.0, j) + std::sqrt(2.0) < grid.nyquist()))
    throw InvalidArgument("modulated bump at 2^" + std::to_string(j) + " does not fit below Nyquist " +
                          std::to_string(grid.nyquist()));
  std::vector<double> offset(static_cast<std::size_t>(grid.dimension), 0.0);
  offset[0] = sign * std::ldexp(1.0, j);
  return field_from_spectrum(grid, ScalarWindow::shifted(make_sharpness_windows().bump, std::move(offset)));
}

/// Spectrum with i.i.d. complex Gaussian coefficients on the lattice box
/// [lo, hi] (frequency units, per axis), zero elsewhere.
inline SampledField make_random_spectral_box(const GridSpec& grid, std::span<const double> lo,
                                             std::span<const double> hi, std::uint64_t seed) {
  grid.validate();
  const auto n = static_cast<std::size_t>(grid.dimension);
  if (lo.size() != n || hi.size() != n) throw InvalidArgument("random spectral box dimension mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField spec = SpectralField::zeros(grid);
  std::vector<long> ilo(n), ihi(n);
  for (std::size_t d = 0; d < n; ++d) {
    ilo[d] = static_cast<long>(std::ceil(lo[d] * grid.period_scale));
    ihi[d] = static_cast<long>(std::floor(hi[d] * grid.period_scale));
  }
  for_each_frequency_in_box(grid, ilo, ihi, [&](std::size_t i, std::span<const double>) {
    const double re = normal(rng);
    const double im = normal(rng);
    spec.values[i] = cplx(re, im);
  });
  return inverse_transform(spec);
}

/// Random field with spectrum inside |xi| < band, tapered by flat_bump(band / 2, band).
inline SampledField make_random_band_limited(const GridSpec& grid, double band, std::uint64_t seed) {
  grid.validate();
  if (!(band > 0.0)) throw InvalidArgument("random band-limited field needs band > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const ScalarWindow taper = ScalarWindow::flat_bump(0.5 * band, band);
  SpectralField spec = SpectralField::zeros(grid);
  for_each_frequency(grid, [&](std::size_t i, std::span<const double> xi) {
    const double re = normal(rng);
    const double im = normal(rng);
    spec.values[i] = taper(xi) * cplx(re, im);
  });
  return inverse_transform(spec);
}

/// Random x-dependent symbol on box1 x box2 whose x-spectrum is weighted by
/// `x_profile`: sigma(x, xi1, xi2) = sum_eta x_profile(eta) c(eta, xi1, xi2) e^{i x.eta}.
inline GeneralSampled make_random_general_symbol(const GridSpec& grid, const LatticeBox& box1, const LatticeBox& box2,
                                                 const ScalarWindow& x_profile, std::uint64_t seed) {
  grid.validate();
  box1.validate(grid);
  box2.validate(grid);
  const std::size_t b1 = box1.size(), b2 = box2.size();
  GeneralSampled out{grid, box1, box2, std::vector<cplx>(grid.size() * b1 * b2)};
  std::vector<double> weight(grid.size());
  for_each_frequency(grid, [&](std::size_t i, std::span<const double> eta) { weight[i] = x_profile(eta); });
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t a = 0; a < b1; ++a)
    for (std::size_t b = 0; b < b2; ++b) {
      SpectralField spec = SpectralField::zeros(grid);
      for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] == 0.0) continue;
        const double re = normal(rng);
        const double im = normal(rng);
        spec.values[i] = weight[i] * cplx(re, im);
      }
      const SampledField profile = inverse_transform(spec);
      for (std::size_t k = 0; k < grid.size(); ++k) out.values[(k * b1 + a) * b2 + b] = profile.values[k];
    }
  return out;
}

/// Band-limited variant: x-spectrum inside |eta| < x_band.
inline GeneralSampled make_random_general_symbol(const GridSpec& grid, const LatticeBox& box1, const LatticeBox& box2,
                                                 double x_band, std::uint64_t seed) {
  if (!(x_band > 0.0)) throw InvalidArgument("x_band must be > 0");
  return make_random_general_symbol(grid, box1, box2, ScalarWindow::flat_bump(0.5 * x_band, x_band), seed);
}

/// Random x-independent symbol on box1 x box2.
inline XIndependentSampled make_random_xindep_symbol(const GridSpec& grid, const LatticeBox& box1,
                                                     const LatticeBox& box2, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  XIndependentSampled out{grid, box1, box2, std::vector<cplx>(box1.size() * box2.size())};
  for (auto& v : out.values) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = cplx(re, im);
  }
  return out;
}

/// Random separable sum of `terms` terms built from shifted, rescaled flat bumps.
inline SeparableSum make_random_separable(int terms, double band, std::uint64_t seed) {
  if (terms < 1 || !(band > 0.0)) throw InvalidArgument("random separable sum needs terms >= 1 and band > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto window = [&] {
    const double inner = 0.1 * band + 0.4 * band * unit(rng);
    const double outer = inner + 0.1 * band + 0.4 * band * unit(rng);
    const double shift = (unit(rng) - 0.5) * 0.5 * band;
    return ScalarWindow::shifted(ScalarWindow::flat_bump(inner, outer), {shift});
  };
  SeparableSum sum;
  for (int t = 0; t < terms; ++t) {
    const double c = 2.0 * unit(rng) - 1.0;
    ScalarWindow m1 = window();
    ScalarWindow m2 = window();
    sum.terms.push_back({c, std::move(m1), std::move(m2)});
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Seminorm tables

/// Central finite-difference weights (Fornberg) for derivative `order` on the
/// integer stencil -r..r, unit spacing.
inline std::vector<double> central_difference_weights(int order, int r) {
  if (order < 0 || r < 0 || 2 * r < order) throw InvalidArgument("stencil too small for derivative order");
  const int m = 2 * r + 1;
  std::vector<double> nodes(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) nodes[static_cast<std::size_t>(i)] = i - r;
  // c[i][k]: weight of node i for derivative k.
  std::vector<std::vector<double>> c(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(order) + 1));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[ui];
    for (int jj = 0; jj < i; ++jj) {
      const auto uj = static_cast<std::size_t>(jj);
      const double c3 = nodes[ui] - nodes[uj];
      c2 *= c3;
      if (jj == i - 1) {
        for (int k = mn; k >= 1; --k) {
          const auto uk = static_cast<std::size_t>(k);
          c[ui][uk] = c1 * (k * c[ui - 1][uk - 1] - c5 * c[ui - 1][uk]) / c2;
        }
        c[ui][0] = -c1 * c5 * c[ui - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        const auto uk = static_cast<std::size_t>(k);
        c[uj][uk] = (c4 * c[uj][uk] - k * c[uj][uk - 1]) / c3;
      }
      c[uj][0] = c4 * c[uj][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) w[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(order)];
  return w;
}

/// Stencil radius used for derivative `order`: 5 points up to order 2, else 7.
inline int stencil_radius(int order) { return order == 0 ? 0 : (order <= 2 ? 2 : 3); }

struct SeminormEntry {
  int alpha = 0;
  int beta1 = 0;
  int beta2 = 0;
  /// sup over all sampled points of |D sigma| / weight.
  double value = 0.0;
  /// Same sup restricted to each band of the table.
  std::vector<double> per_band;
  double worst_x = 0.0;
  double worst_xi1 = 0.0;
  double worst_xi2 = 0.0;
};

struct SeminormTable {
  ClassSpec class_spec;
  /// Band k covers max(|xi1|, |xi2|) in [2^{k-1/2}, 2^{k+1/2}] (k = 0: [0, 2^{1/2}]).
  std::vector<int> bands;
  std::vector<SeminormEntry> entries;

  const SeminormEntry& entry(int alpha, int beta1, int beta2) const {
    for (const auto& e : entries)
      if (e.alpha == alpha && e.beta1 == beta1 && e.beta2 == beta2) return e;
    throw InvalidArgument("seminorm table has no entry for the requested order");
  }

  /// max over entries of the band-restricted sup, for band index b.
  double band_max(std::size_t b) const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.per_band.at(b));
    return m;
  }
};

struct SeminormOptions {
  /// Lattice supplying the step (half the frequency spacing for separable
  /// symbols, the spacing itself for sampled ones).
  GridSpec grid;
  int band_min = 0;
  /// Defaults to max_symbol_band(grid) + 1 when negative.
  int band_max = -1;
  /// Sample points per band along each axis, per unit of 2^k.
  int points_per_band = 32;
};

/// Weighted finite-difference sups of d_x^alpha d_xi1^beta1 d_xi2^beta2 sigma for
/// every order up to class_spec.max_order, tabulated per dyadic band. n = 1.
inline SeminormTable seminorm_estimate(const Symbol& sigma, const ClassSpec& class_spec,
                                       const SeminormOptions& options) {
  class_spec.validate();
  const GridSpec& grid = options.grid;
  grid.validate();
  if (grid.dimension != 1) throw InvalidArgument("seminorm_estimate supports n = 1 only");
  detail::require_symbol_grid(sigma, grid);
  if (options.points_per_band < 1) throw InvalidArgument("points_per_band must be >= 1");
  const int band_hi = options.band_max >= 0 ? options.band_max : max_symbol_band(grid) + 1;
  if (options.band_min < 0 || band_hi < options.band_min) throw InvalidArgument("invalid seminorm band range");

  const int order_cap = class_spec.max_order;
  const int alpha_cap = sigma.x_dependent() ? order_cap : 0;
  const auto& rep = sigma.representation();
  const bool sampled = !sigma.separable();
  const double step = sampled ? grid.frequency_spacing() : 0.5 * grid.frequency_spacing();
  const int R = stencil_radius(order_cap) > 0 ? 3 : 0;
  const int width = 2 * R + 1;

  std::vector<std::vector<double>> weights(static_cast<std::size_t>(order_cap) + 1);
  for (int d = 0; d <= order_cap; ++d) {
    const int r = stencil_radius(d);
    auto w = central_difference_weights(d, r);
    std::vector<double> padded(static_cast<std::size_t>(width), 0.0);
    for (int i = -r; i <= r; ++i) padded[static_cast<std::size_t>(i + R)] = w[static_cast<std::size_t>(i + r)];
    weights[static_cast<std::size_t>(d)] = std::move(padded);
  }

  // Symbol value at lattice/continuous coordinates.
  auto sampled_value = [&](std::size_t k, long m1, long m2) -> cplx {
    const long a1[1] = {m1};
    const long a2[1] = {m2};
    if (const auto* x = std::get_if<XIndependentSampled>(&rep)) {
      auto p1 = x->box1.position(a1);
      auto p2 = x->box2.position(a2);
      return p1 && p2 ? x->values[*p1 * x->box2.size() + *p2] : cplx(0.0);
    }
    const auto& g = std::get<GeneralSampled>(rep);
    auto p1 = g.box1.position(a1);
    auto p2 = g.box2.position(a2);
    return p1 && p2 ? g.values[(k * g.box1.size() + *p1) * g.box2.size() + *p2] : cplx(0.0);
  };

  SeminormTable table;
  table.class_spec = class_spec;
  for (int k = options.band_min; k <= band_hi; ++k) table.bands.push_back(k);
  for (int a = 0; a <= order_cap; ++a)
    for (int b1 = 0; b1 <= order_cap; ++b1)
      for (int b2 = 0; b2 <= order_cap; ++b2) {
        SeminormEntry e;
        e.alpha = a;
        e.beta1 = b1;
        e.beta2 = b2;
        e.per_band.assign(table.bands.size(), 0.0);
        table.entries.push_back(e);
      }
  auto entry_index = [&](int a, int b1, int b2) {
    return static_cast<std::size_t>((a * (order_cap + 1) + b1) * (order_cap + 1) + b2);
  };

  const std::size_t x_points = sigma.x_dependent() ? grid.size() : 1;
  std::vector<cplx> cube(static_cast<std::size_t>(width * width) * static_cast<std::size_t>(sigma.x_dependent() ? width : 1));
  for (std::size_t bi = 0; bi < table.bands.size(); ++bi) {
    const int k = table.bands[bi];
    const double lo = k == 0 ? 0.0 : std::ldexp(std::sqrt(0.5), k);
    const double hi = std::ldexp(std::sqrt(2.0), k);
    double spacing = std::ldexp(1.0, k) / options.points_per_band;
    if (sampled) spacing = std::max(1.0, std::round(spacing / step)) * step;
    const long count = static_cast<long>(std::floor(hi / spacing));
    for (long i1 = -count; i1 <= count; ++i1)
      for (long i2 = -count; i2 <= count; ++i2) {
        const double xi1 = i1 * spacing;
        const double xi2 = i2 * spacing;
        const double mx = std::max(std::abs(xi1), std::abs(xi2));
        if (mx < lo || mx > hi) continue;
        const double weight = class_spec.weight(std::abs(xi1), std::abs(xi2));
        for (std::size_t kx = 0; kx < x_points; ++kx) {
          // Fill the stencil cube: [x offset][xi1 offset][xi2 offset].
          const int wx = sigma.x_dependent() ? width : 1;
          for (int ox = 0; ox < wx; ++ox)
            for (int o1 = 0; o1 < width; ++o1)
              for (int o2 = 0; o2 < width; ++o2) {
                cplx v;
                if (const auto* s = std::get_if<SeparableSum>(&rep)) {
                  v = s->evaluate(std::array<double, 1>{xi1 + (o1 - R) * step},
                                  std::array<double, 1>{xi2 + (o2 - R) * step});
                } else {
                  const long n_axis = static_cast<long>(grid.samples_per_axis);
                  const long kk = sigma.x_dependent()
                                      ? ((static_cast<long>(kx) + ox - R) % n_axis + n_axis) % n_axis
                                      : 0;
                  v = sampled_value(static_cast<std::size_t>(kk), std::lround(xi1 / step) + o1 - R,
                                    std::lround(xi2 / step) + o2 - R);
                }
                cube[static_cast<std::size_t>((ox * width + o1) * width + o2)] = v;
              }
          for (int a = 0; a <= alpha_cap; ++a)
            for (int b1 = 0; b1 <= order_cap; ++b1)
              for (int b2 = 0; b2 <= order_cap; ++b2) {
                const auto& wa = weights[static_cast<std::size_t>(a)];
                const auto& w1 = weights[static_cast<std::size_t>(b1)];
                const auto& w2 = weights[static_cast<std::size_t>(b2)];
                cplx d(0.0);
                const int wx = sigma.x_dependent() ? width : 1;
                for (int ox = 0; ox < wx; ++ox) {
                  const double fx = sigma.x_dependent() ? wa[static_cast<std::size_t>(ox)] : 1.0;
                  if (fx == 0.0) continue;
                  for (int o1 = 0; o1 < width; ++o1) {
                    const double f1 = w1[static_cast<std::size_t>(o1)];
                    if (f1 == 0.0) continue;
                    for (int o2 = 0; o2 < width; ++o2) {
                      const double f2 = w2[static_cast<std::size_t>(o2)];
                      if (f2 == 0.0) continue;
                      d += fx * f1 * f2 * cube[static_cast<std::size_t>((ox * width + o1) * width + o2)];
                    }
                  }
                }
                const double scale = std::pow(step, -(b1 + b2)) *
                                     (sigma.x_dependent() ? std::pow(grid.spacing(), -a) : 1.0);
                const double value = std::abs(d) * scale / weight;
                if (!std::isfinite(value))
                  throw NumericError("non-finite difference quotient for order (" + std::to_string(a) + "," +
                                     std::to_string(b1) + "," + std::to_string(b2) + ") at xi = (" +
                                     std::to_string(xi1) + ", " + std::to_string(xi2) + ")");
                auto& e = table.entries[entry_index(a, b1, b2)];
                e.per_band[bi] = std::max(e.per_band[bi], value);
                if (value > e.value) {
                  e.value = value;
                  e.worst_x = sigma.x_dependent() ? grid.coordinate(kx) : 0.0;
                  e.worst_xi1 = xi1;
                  e.worst_xi2 = xi2;
                }
              }
        }
      }
  }
  return table;
}

}  // namespace besovbilin

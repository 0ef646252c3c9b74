#pragma once

// Bilinear pseudo-differential operators on the periodic grid,
//   T(f1, f2)(x) = (2 pi)^{-2n} sum_{xi1, xi2} e^{i x.(xi1 + xi2)} sigma(x, xi1, xi2)
//                  F f1(xi1) F f2(xi2) dxi^{2n},
// evaluated by direct quadrature, by a fast path for x-independent symbols, and
// by products of Fourier multipliers for separable symbols. Also the dyadic
// decomposition sigma_{j,K,nu} and the checks built on it.

#include <besovbilin/grid_fourier.hpp>
#include <besovbilin/norms.hpp>
#include <besovbilin/parallel.hpp>
#include <besovbilin/symbol_class.hpp>
#include <besovbilin/windows.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace besovbilin {

/// Axis-aligned block of signed frequency indices, row-major (last axis fastest).
struct LatticeBox {
  std::vector<long> lower;
  std::vector<long> extent;

  static LatticeBox full(const GridSpec& grid) {
    const auto n = static_cast<std::size_t>(grid.dimension);
    return {std::vector<long>(n, -static_cast<long>(grid.samples_per_axis / 2)),
            std::vector<long>(n, static_cast<long>(grid.samples_per_axis))};
  }

  /// Indices [-M/2, M/2) on every axis.
  static LatticeBox centered(const GridSpec& grid, std::size_t M) {
    if (M == 0 || M > grid.samples_per_axis || M % 2 != 0)
      throw InvalidArgument("centered box needs an even M with 0 < M <= N");
    const auto n = static_cast<std::size_t>(grid.dimension);
    return {std::vector<long>(n, -static_cast<long>(M / 2)), std::vector<long>(n, static_cast<long>(M))};
  }

  std::size_t dimension() const { return lower.size(); }

  std::size_t size() const {
    std::size_t s = 1;
    for (long e : extent) s *= static_cast<std::size_t>(std::max(0L, e));
    return s;
  }

  bool empty() const { return size() == 0; }

  void signed_indices(std::size_t pos, std::span<long> m) const {
    for (std::size_t d = dimension(); d-- > 0;) {
      const auto e = static_cast<std::size_t>(extent[d]);
      m[d] = lower[d] + static_cast<long>(pos % e);
      pos /= e;
    }
  }

  std::optional<std::size_t> position(std::span<const long> m) const {
    std::size_t pos = 0;
    for (std::size_t d = 0; d < dimension(); ++d) {
      const long off = m[d] - lower[d];
      if (off < 0 || off >= extent[d]) return std::nullopt;
      pos = pos * static_cast<std::size_t>(extent[d]) + static_cast<std::size_t>(off);
    }
    return pos;
  }

  void validate(const GridSpec& grid) const {
    const auto n = static_cast<std::size_t>(grid.dimension);
    if (lower.size() != n || extent.size() != n) throw InvalidArgument("lattice box dimension does not match grid");
    const long lo = -static_cast<long>(grid.samples_per_axis / 2);
    const long hi = static_cast<long>(grid.samples_per_axis / 2);
    for (std::size_t d = 0; d < n; ++d) {
      if (extent[d] < 0) throw InvalidArgument("lattice box extent must be >= 0");
      if (extent[d] > 0 && (lower[d] < lo || lower[d] + extent[d] > hi))
        throw InvalidArgument("lattice box exceeds the frequency lattice");
    }
  }

  bool operator==(const LatticeBox&) const = default;
};

struct SeparableTerm {
  double coefficient = 1.0;
  ScalarWindow m1;
  ScalarWindow m2;
};

/// sigma(xi1, xi2) = sum_t c_t m1_t(xi1) m2_t(xi2).
struct SeparableSum {
  std::vector<SeparableTerm> terms;

  double evaluate(std::span<const double> xi1, std::span<const double> xi2) const {
    double s = 0.0;
    for (const auto& t : terms) {
      const double a = t.m1(xi1);
      if (a == 0.0) continue;
      s += t.coefficient * a * t.m2(xi2);
    }
    return s;
  }
};

/// sigma(xi1, xi2) on box1 x box2; values[a * |box2| + b]. Zero outside the boxes.
struct XIndependentSampled {
  GridSpec grid;
  LatticeBox box1;
  LatticeBox box2;
  std::vector<cplx> values;
};

/// sigma(x_k, xi1, xi2) on (space lattice) x box1 x box2;
/// values[(k * |box1| + a) * |box2| + b]. Zero outside the boxes.
struct GeneralSampled {
  GridSpec grid;
  LatticeBox box1;
  LatticeBox box2;
  std::vector<cplx> values;
};

class Symbol {
 public:
  using Representation = std::variant<SeparableSum, XIndependentSampled, GeneralSampled>;

  Symbol() : rep_(SeparableSum{}) {}
  Symbol(Representation rep) : rep_(std::move(rep)) { validate(); }  // NOLINT(google-explicit-constructor)

  const Representation& representation() const { return rep_; }
  bool x_dependent() const { return std::holds_alternative<GeneralSampled>(rep_); }
  bool separable() const { return std::holds_alternative<SeparableSum>(rep_); }

  /// Grid of a sampled representation; empty for separable sums.
  std::optional<GridSpec> grid() const {
    if (const auto* x = std::get_if<XIndependentSampled>(&rep_)) return x->grid;
    if (const auto* g = std::get_if<GeneralSampled>(&rep_)) return g->grid;
    return std::nullopt;
  }

  std::string name() const {
    if (separable()) return "separable_sum";
    return x_dependent() ? "general_sampled" : "x_independent_sampled";
  }

 private:
  void validate() const {
    if (const auto* s = std::get_if<SeparableSum>(&rep_)) {
      for (const auto& t : s->terms)
        if (!std::isfinite(t.coefficient)) throw InvalidArgument("separable term has a non-finite coefficient");
      return;
    }
    auto check = [](const auto& r, std::size_t expected) {
      r.grid.validate();
      r.box1.validate(r.grid);
      r.box2.validate(r.grid);
      if (r.values.size() != expected)
        throw InvalidArgument("sampled symbol has " + std::to_string(r.values.size()) + " values, lattice needs " +
                              std::to_string(expected));
    };
    if (const auto* x = std::get_if<XIndependentSampled>(&rep_)) check(*x, x->box1.size() * x->box2.size());
    if (const auto* g = std::get_if<GeneralSampled>(&rep_))
      check(*g, g->grid.size() * g->box1.size() * g->box2.size());
  }

  Representation rep_;
};

/// Samples an x-independent symbol function fn(xi1, xi2) on two boxes.
template <class Fn>
XIndependentSampled sample_x_independent(const GridSpec& grid, const LatticeBox& box1, const LatticeBox& box2,
                                         Fn&& fn) {
  const auto n = static_cast<std::size_t>(grid.dimension);
  XIndependentSampled out{grid, box1, box2, std::vector<cplx>(box1.size() * box2.size())};
  std::vector<long> m1(n), m2(n);
  std::vector<double> xi1(n), xi2(n);
  for (std::size_t a = 0; a < box1.size(); ++a) {
    box1.signed_indices(a, m1);
    for (std::size_t d = 0; d < n; ++d) xi1[d] = grid.frequency(m1[d]);
    for (std::size_t b = 0; b < box2.size(); ++b) {
      box2.signed_indices(b, m2);
      for (std::size_t d = 0; d < n; ++d) xi2[d] = grid.frequency(m2[d]);
      out.values[a * box2.size() + b] = cplx(fn(std::span<const double>(xi1), std::span<const double>(xi2)));
    }
  }
  return out;
}

/// Samples fn(x, xi1, xi2) on (space lattice) x box1 x box2.
template <class Fn>
GeneralSampled sample_general(const GridSpec& grid, const LatticeBox& box1, const LatticeBox& box2, Fn&& fn) {
  const auto n = static_cast<std::size_t>(grid.dimension);
  const std::size_t b1 = box1.size(), b2 = box2.size();
  GeneralSampled out{grid, box1, box2, std::vector<cplx>(grid.size() * b1 * b2)};
  std::vector<std::size_t> axes(n);
  std::vector<long> m1(n), m2(n);
  std::vector<double> x(n), xi1(n), xi2(n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.unflatten(k, axes);
    for (std::size_t d = 0; d < n; ++d) x[d] = grid.coordinate(axes[d]);
    for (std::size_t a = 0; a < b1; ++a) {
      box1.signed_indices(a, m1);
      for (std::size_t d = 0; d < n; ++d) xi1[d] = grid.frequency(m1[d]);
      for (std::size_t b = 0; b < b2; ++b) {
        box2.signed_indices(b, m2);
        for (std::size_t d = 0; d < n; ++d) xi2[d] = grid.frequency(m2[d]);
        out.values[(k * b1 + a) * b2 + b] = cplx(
            fn(std::span<const double>(x), std::span<const double>(xi1), std::span<const double>(xi2)));
      }
    }
  }
  return out;
}

namespace detail {

/// Frequencies and flat spectral indices of the points of a box.
struct BoxPoints {
  std::vector<std::vector<long>> m;
  std::vector<std::vector<double>> xi;
  std::vector<std::size_t> flat;
};

inline BoxPoints box_points(const GridSpec& grid, const LatticeBox& box) {
  const auto n = static_cast<std::size_t>(grid.dimension);
  BoxPoints pts;
  const std::size_t size = box.size();
  pts.m.resize(size, std::vector<long>(n));
  pts.xi.resize(size, std::vector<double>(n));
  pts.flat.resize(size);
  for (std::size_t a = 0; a < size; ++a) {
    box.signed_indices(a, pts.m[a]);
    for (std::size_t d = 0; d < n; ++d) pts.xi[a][d] = grid.frequency(pts.m[a][d]);
    pts.flat[a] = grid.flat_of_signed(pts.m[a]);
  }
  return pts;
}

/// Window values on every point of a box.
inline std::vector<double> window_on_box(const ScalarWindow& w, const BoxPoints& pts) {
  std::vector<double> out(pts.xi.size());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = w(pts.xi[a]);
  return out;
}

/// x-independent symbol values on box1 x box2 (row-major), any representation.
inline std::vector<cplx> x_independent_table(const SeparableSum& s, const BoxPoints& p1, const BoxPoints& p2) {
  std::vector<cplx> table(p1.xi.size() * p2.xi.size());
  for (const auto& t : s.terms) {
    const auto a_vals = window_on_box(t.m1, p1);
    const auto b_vals = window_on_box(t.m2, p2);
    for (std::size_t a = 0; a < a_vals.size(); ++a) {
      if (a_vals[a] == 0.0) continue;
      const double ca = t.coefficient * a_vals[a];
      for (std::size_t b = 0; b < b_vals.size(); ++b) table[a * b_vals.size() + b] += ca * b_vals[b];
    }
  }
  return table;
}

inline void require_symbol_grid(const Symbol& sigma, const GridSpec& grid) {
  if (auto g = sigma.grid()) require_same_grid(*g, grid, "symbol vs field");
}

}  // namespace detail

enum class EvaluationPath { automatic, bruteforce, x_independent, separable };

inline std::string to_string(EvaluationPath p) {
  switch (p) {
    case EvaluationPath::bruteforce: return "bruteforce";
    case EvaluationPath::x_independent: return "xindep";
    case EvaluationPath::separable: return "separable";
    default: return "auto";
  }
}

/// Direct double-sum quadrature; works for every representation.
inline SampledField apply_bilinear_bruteforce(const Symbol& sigma, const SampledField& f1, const SampledField& f2) {
  require_same_grid(f1.grid, f2.grid, "bilinear inputs");
  const GridSpec& grid = f1.grid;
  detail::require_symbol_grid(sigma, grid);
  const auto n = static_cast<std::size_t>(grid.dimension);
  const SpectralField F1 = forward_transform(f1);
  const SpectralField F2 = forward_transform(f2);

  const auto& rep = sigma.representation();
  LatticeBox box1 = LatticeBox::full(grid), box2 = LatticeBox::full(grid);
  if (const auto* x = std::get_if<XIndependentSampled>(&rep)) box1 = x->box1, box2 = x->box2;
  if (const auto* g = std::get_if<GeneralSampled>(&rep)) box1 = g->box1, box2 = g->box2;
  const auto p1 = detail::box_points(grid, box1);
  const auto p2 = detail::box_points(grid, box2);
  const std::size_t b1 = box1.size(), b2 = box2.size();

  std::vector<cplx> xi_table;
  const std::vector<cplx>* general = nullptr;
  if (const auto* s = std::get_if<SeparableSum>(&rep)) {
    xi_table = detail::x_independent_table(*s, p1, p2);
  } else if (const auto* x = std::get_if<XIndependentSampled>(&rep)) {
    xi_table = x->values;
  } else {
    general = &std::get<GeneralSampled>(rep).values;
  }
  require_finite(general ? std::span<const cplx>(*general) : std::span<const cplx>(xi_table), "symbol samples");

  const LatticePhase phase(grid);
  const double scale = std::pow(grid.frequency_spacing() / (2.0 * kPi), 2 * grid.dimension);
  std::vector<cplx> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    std::vector<std::size_t> axes(n);
    grid.unflatten(k, axes);
    std::vector<cplx> e2(b2);
    for (std::size_t b = 0; b < b2; ++b) e2[b] = phase(axes, p2.m[b]) * F2.values[p2.flat[b]];
    const cplx* sig = general ? general->data() + k * b1 * b2 : xi_table.data();
    cplx total(0.0, 0.0);
    for (std::size_t a = 0; a < b1; ++a) {
      const cplx e1 = phase(axes, p1.m[a]) * F1.values[p1.flat[a]];
      cplx inner(0.0, 0.0);
      const cplx* row = sig + a * b2;
      for (std::size_t b = 0; b < b2; ++b) inner += row[b] * e2[b];
      total += e1 * inner;
    }
    out[k] = scale * total;
  });
  return SampledField(grid, std::move(out));
}

/// Fast path for x-independent symbols: one inverse transform per xi1 slice,
///   T(x) = sum_{xi1} e^{i x.xi1} F f1(xi1) (dxi / 2 pi)^n F^{-1}[sigma(xi1, .) F f2](x).
inline SampledField apply_bilinear_xindep(const Symbol& sigma, const SampledField& f1, const SampledField& f2) {
  if (sigma.x_dependent())
    throw InvalidArgument("the x-independent path cannot evaluate an x-dependent (general_sampled) symbol");
  require_same_grid(f1.grid, f2.grid, "bilinear inputs");
  const GridSpec& grid = f1.grid;
  detail::require_symbol_grid(sigma, grid);
  const auto n = static_cast<std::size_t>(grid.dimension);
  const SpectralField F1 = forward_transform(f1);
  const SpectralField F2 = forward_transform(f2);

  const auto& rep = sigma.representation();
  LatticeBox box1 = LatticeBox::full(grid), box2 = LatticeBox::full(grid);
  if (const auto* x = std::get_if<XIndependentSampled>(&rep)) box1 = x->box1, box2 = x->box2;
  const auto p1 = detail::box_points(grid, box1);
  const auto p2 = detail::box_points(grid, box2);
  const std::size_t b2 = box2.size();

  const SeparableSum* sep = std::get_if<SeparableSum>(&rep);
  std::vector<std::vector<double>> m2_values;
  std::vector<std::vector<double>> m1_values;
  if (sep) {
    for (const auto& t : sep->terms) {
      m1_values.push_back(detail::window_on_box(t.m1, p1));
      m2_values.push_back(detail::window_on_box(t.m2, p2));
    }
  } else {
    require_finite(std::get<XIndependentSampled>(rep).values, "symbol samples");
  }

  const double scale = std::pow(grid.frequency_spacing() / (2.0 * kPi), grid.dimension);
  const LatticePhase phase(grid);
  std::vector<cplx> out(grid.size());
  std::vector<std::size_t> axes(n);
  for (std::size_t a = 0; a < p1.xi.size(); ++a) {
    const cplx c1 = F1.values[p1.flat[a]];
    if (c1 == cplx(0.0)) continue;
    SpectralField slice = SpectralField::zeros(grid);
    bool any = false;
    if (sep) {
      for (std::size_t t = 0; t < sep->terms.size(); ++t) {
        const double w1 = sep->terms[t].coefficient * m1_values[t][a];
        if (w1 == 0.0) continue;
        for (std::size_t b = 0; b < b2; ++b) slice.values[p2.flat[b]] += w1 * m2_values[t][b] * F2.values[p2.flat[b]];
        any = true;
      }
    } else {
      const auto& vals = std::get<XIndependentSampled>(rep).values;
      for (std::size_t b = 0; b < b2; ++b) {
        const cplx s = vals[a * b2 + b];
        if (s == cplx(0.0)) continue;
        slice.values[p2.flat[b]] = s * F2.values[p2.flat[b]];
        any = true;
      }
    }
    if (!any) continue;
    const SampledField g = inverse_transform(slice);
    const cplx weight = scale * c1;
    for (std::size_t k = 0; k < out.size(); ++k) {
      grid.unflatten(k, axes);
      out[k] += weight * phase(axes, p1.m[a]) * g.values[k];
    }
  }
  return SampledField(grid, std::move(out));
}

/// sum_t c_t (m1_t(D) f1)(m2_t(D) f2).
inline SampledField apply_bilinear_separable(const Symbol& sigma, const SampledField& f1, const SampledField& f2) {
  const auto* sep = std::get_if<SeparableSum>(&sigma.representation());
  if (!sep) throw InvalidArgument("the separable path needs a separable_sum symbol, got " + sigma.name());
  require_same_grid(f1.grid, f2.grid, "bilinear inputs");
  const SpectralField F1 = forward_transform(f1);
  const SpectralField F2 = forward_transform(f2);
  SampledField out = SampledField::zeros(f1.grid);
  for (const auto& t : sep->terms) {
    SpectralField a = F1, b = F2;
    multiply_spectrum(t.m1, a);
    multiply_spectrum(t.m2, b);
    const SampledField ga = inverse_transform(a);
    const SampledField gb = inverse_transform(b);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += t.coefficient * ga.values[k] * gb.values[k];
  }
  return out;
}

inline SampledField apply_bilinear(const Symbol& sigma, const SampledField& f1, const SampledField& f2,
                                   EvaluationPath path = EvaluationPath::automatic) {
  if (path == EvaluationPath::automatic) {
    if (sigma.separable()) path = EvaluationPath::separable;
    else if (sigma.x_dependent()) path = EvaluationPath::bruteforce;
    else path = EvaluationPath::x_independent;
  }
  switch (path) {
    case EvaluationPath::separable: return apply_bilinear_separable(sigma, f1, f2);
    case EvaluationPath::x_independent: return apply_bilinear_xindep(sigma, f1, f2);
    default: return apply_bilinear_bruteforce(sigma, f1, f2);
  }
}

/// <f, g> = sum_k f(x_k) conj(g(x_k)) dx^n (conjugate-linear in the second slot).
inline cplx inner_product(const SampledField& f, const SampledField& g) {
  require_same_grid(f.grid, g.grid, "inner product");
  cplx s(0.0, 0.0);
  for (std::size_t k = 0; k < f.values.size(); ++k) s += f.values[k] * std::conj(g.values[k]);
  return s * std::pow(f.grid.spacing(), f.grid.dimension);
}

/// <T_sigma(f1, f2), g>.
inline cplx trilinear_pairing(const Symbol& sigma, const SampledField& f1, const SampledField& f2,
                              const SampledField& g, EvaluationPath path = EvaluationPath::automatic) {
  return inner_product(apply_bilinear(sigma, f1, f2, path), g);
}

/// <T_sigma(f1, f2), g> for a sampled x-independent symbol, from spectra:
/// (dxi / 2 pi)^{2n} sum_{xi1, xi2} sigma F f1(xi1) F f2(xi2) conj(F g(xi1 + xi2)).
inline cplx trilinear_pairing_spectral(const XIndependentSampled& sigma, const SpectralField& F1,
                                       const SpectralField& F2, const SpectralField& G) {
  const GridSpec& grid = F1.grid;
  require_same_grid(grid, F2.grid, "pairing inputs");
  require_same_grid(grid, G.grid, "pairing inputs");
  require_same_grid(grid, sigma.grid, "symbol vs field");
  const auto n = static_cast<std::size_t>(grid.dimension);
  const auto p1 = detail::box_points(grid, sigma.box1);
  const auto p2 = detail::box_points(grid, sigma.box2);
  std::vector<long> sum(n);
  cplx total(0.0, 0.0);
  for (std::size_t a = 0; a < p1.m.size(); ++a) {
    const cplx c1 = F1.values[p1.flat[a]];
    for (std::size_t b = 0; b < p2.m.size(); ++b) {
      const cplx s = sigma.values[a * p2.m.size() + b];
      if (s == cplx(0.0)) continue;
      for (std::size_t d = 0; d < n; ++d) sum[d] = p1.m[a][d] + p2.m[b][d];
      total += s * c1 * F2.values[p2.flat[b]] * std::conj(G.values[grid.flat_of_signed(sum)]);
    }
  }
  return total * std::pow(grid.frequency_spacing() / (2.0 * kPi), 2 * grid.dimension);
}

// ---------------------------------------------------------------------------
// Dyadic decomposition
//   sigma_{j,K,nu}(x, xi1, xi2) = [psi_j(D_x) sigma] psi_k1(xi1) psi_k2(xi2)
//                                 phi(xi1 - nu1) phi(xi2 - nu2)

struct SymbolPiece {
  int j = 0;
  std::array<int, 2> K{0, 0};
  std::vector<long> nu1;
  std::vector<long> nu2;
  /// Materialized piece: XIndependentSampled or GeneralSampled on the cell boxes.
  Symbol symbol;
  /// True when every sample vanishes exactly.
  bool zero = true;

  /// Center nu1 + nu2 of the output spectral box.
  std::vector<double> output_center() const {
    std::vector<double> c(nu1.size());
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = static_cast<double>(nu1[d] + nu2[d]);
    return c;
  }
  /// Half-width 2^{j+2} of the output spectral box.
  double output_half_width() const { return std::ldexp(1.0, j + 2); }
};

namespace detail {

/// Lattice indices of the cell nu + [-1, 1]^n, clipped to the lattice and to `within`.
inline LatticeBox cell_box(const GridSpec& grid, std::span<const long> nu, const LatticeBox& within) {
  const auto n = static_cast<std::size_t>(grid.dimension);
  LatticeBox box{std::vector<long>(n), std::vector<long>(n)};
  for (std::size_t d = 0; d < n; ++d) {
    const long lo = static_cast<long>(std::ceil((static_cast<double>(nu[d]) - 1.0) * grid.period_scale));
    const long hi = static_cast<long>(std::floor((static_cast<double>(nu[d]) + 1.0) * grid.period_scale));
    const long a = std::max(lo, within.lower[d]);
    const long b = std::min(hi, within.lower[d] + within.extent[d] - 1);
    box.lower[d] = a;
    box.extent[d] = std::max(0L, b - a + 1);
  }
  if (box.empty()) std::fill(box.extent.begin(), box.extent.end(), 0L);
  return box;
}

}  // namespace detail

/// Materializes sigma_{j,K,nu} on the lattice of `grid`. For x-independent symbols
/// psi_j(D_x) sigma = psi_j(0) sigma, so every piece with j >= 1 is zero.
inline SymbolPiece decompose_symbol(const Symbol& sigma, const GridSpec& grid, int j, std::array<int, 2> K,
                                    std::span<const long> nu1, std::span<const long> nu2) {
  grid.validate();
  detail::require_symbol_grid(sigma, grid);
  if (j < 0 || K[0] < 0 || K[1] < 0) throw InvalidArgument("decompose_symbol requires j, k1, k2 >= 0");
  const auto n = static_cast<std::size_t>(grid.dimension);
  if (nu1.size() != n || nu2.size() != n) throw InvalidArgument("decompose_symbol: nu dimension mismatch");

  SymbolPiece piece;
  piece.j = j;
  piece.K = K;
  piece.nu1.assign(nu1.begin(), nu1.end());
  piece.nu2.assign(nu2.begin(), nu2.end());

  const auto& rep = sigma.representation();
  LatticeBox base1 = LatticeBox::full(grid), base2 = LatticeBox::full(grid);
  if (const auto* x = std::get_if<XIndependentSampled>(&rep)) base1 = x->box1, base2 = x->box2;
  if (const auto* g = std::get_if<GeneralSampled>(&rep)) base1 = g->box1, base2 = g->box2;
  const LatticeBox box1 = detail::cell_box(grid, nu1, base1);
  const LatticeBox box2 = detail::cell_box(grid, nu2, base2);
  const auto p1 = detail::box_points(grid, box1);
  const auto p2 = detail::box_points(grid, box2);
  const std::size_t b1 = box1.size(), b2 = box2.size();

  // Frequency-side window factor per slot.
  auto slot_factor = [&](const detail::BoxPoints& p, int k, std::span<const long> nu) {
    const ScalarWindow band = ScalarWindow::lp_band(k);
    const ScalarWindow cell = make_cube_partition(nu);
    std::vector<double> w(p.xi.size());
    for (std::size_t a = 0; a < w.size(); ++a) {
      const double c = cell(p.xi[a]);
      w[a] = c == 0.0 ? 0.0 : c * band(p.xi[a]);
    }
    return w;
  };
  const auto w1 = slot_factor(p1, K[0], nu1);
  const auto w2 = slot_factor(p2, K[1], nu2);

  if (!sigma.x_dependent()) {
    std::vector<cplx> values(b1 * b2);
    const std::vector<double> origin(n, 0.0);
    const double x_factor = ScalarWindow::lp_band(j)(origin);
    if (x_factor != 0.0) {
      std::vector<cplx> base;
      if (const auto* s = std::get_if<SeparableSum>(&rep)) {
        base = detail::x_independent_table(*s, p1, p2);
      } else {
        const auto& x = std::get<XIndependentSampled>(rep);
        base.resize(b1 * b2);
        for (std::size_t a = 0; a < b1; ++a)
          for (std::size_t b = 0; b < b2; ++b)
            base[a * b2 + b] = x.values[*x.box1.position(p1.m[a]) * x.box2.size() + *x.box2.position(p2.m[b])];
      }
      for (std::size_t a = 0; a < b1; ++a)
        for (std::size_t b = 0; b < b2; ++b) values[a * b2 + b] = x_factor * w1[a] * w2[b] * base[a * b2 + b];
    }
    piece.zero = std::all_of(values.begin(), values.end(), [](cplx v) { return v == cplx(0.0); });
    piece.symbol = Symbol(XIndependentSampled{grid, box1, box2, std::move(values)});
    return piece;
  }

  const auto& g = std::get<GeneralSampled>(rep);
  const std::size_t gb1 = g.box1.size(), gb2 = g.box2.size();
  std::vector<cplx> values(grid.size() * b1 * b2);
  const ScalarWindow x_band = ScalarWindow::lp_band(j);
  for (std::size_t a = 0; a < b1; ++a) {
    const std::size_t ga = *g.box1.position(p1.m[a]);
    for (std::size_t b = 0; b < b2; ++b) {
      const double w = w1[a] * w2[b];
      if (w == 0.0) continue;
      const std::size_t gb = *g.box2.position(p2.m[b]);
      std::vector<cplx> profile(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) profile[k] = g.values[(k * gb1 + ga) * gb2 + gb];
      const SampledField filtered = apply_multiplier(x_band, SampledField(grid, std::move(profile)));
      for (std::size_t k = 0; k < grid.size(); ++k) values[(k * b1 + a) * b2 + b] = w * filtered.values[k];
    }
  }
  piece.zero = std::all_of(values.begin(), values.end(), [](cplx v) { return v == cplx(0.0); });
  piece.symbol = Symbol(GeneralSampled{grid, box1, box2, std::move(values)});
  return piece;
}

struct DecompositionRange {
  int j_max = 0;
  int k_max = 0;
  /// Cell centers nu_d in [nu_min, nu_max] on every axis.
  long nu_min = 0;
  long nu_max = 0;
};

/// Per-slot coverage (sum_{k <= k_max} psi_k)(sum_{nu in range} phi(. - nu)).
inline double decomposition_coverage(std::span<const double> xi, const DecompositionRange& range) {
  const double band = smoothstep(2.0 - std::ldexp(detail::euclidean_norm(xi), -range.k_max));
  double cells = 1.0;
  for (double v : xi) {
    double s = 0.0;
    for (long nu = range.nu_min; nu <= range.nu_max; ++nu) s += cube_profile(v - static_cast<double>(nu));
    cells *= s;
  }
  return band * cells;
}

/// Sums sigma_{j,K,nu} over the range. Throws when the range leaves part of the
/// symbol's mass uncovered (relative to max |sigma|, above `tolerance`).
inline Symbol reconstruct_symbol(const Symbol& sigma, const GridSpec& grid, const DecompositionRange& range,
                                 double tolerance = 1e-12) {
  detail::require_symbol_grid(sigma, grid);
  const auto n = static_cast<std::size_t>(grid.dimension);
  const auto& rep = sigma.representation();
  LatticeBox base1 = LatticeBox::full(grid), base2 = LatticeBox::full(grid);
  if (const auto* x = std::get_if<XIndependentSampled>(&rep)) base1 = x->box1, base2 = x->box2;
  if (const auto* g = std::get_if<GeneralSampled>(&rep)) base1 = g->box1, base2 = g->box2;
  const auto p1 = detail::box_points(grid, base1);
  const auto p2 = detail::box_points(grid, base2);
  const std::size_t b1 = base1.size(), b2 = base2.size();

  // Coverage of the symbol's mass.
  std::vector<double> c1(b1), c2(b2);
  for (std::size_t a = 0; a < b1; ++a) c1[a] = decomposition_coverage(p1.xi[a], range);
  for (std::size_t b = 0; b < b2; ++b) c2[b] = decomposition_coverage(p2.xi[b], range);
  double peak = 0.0, uncovered = 0.0;
  if (!sigma.x_dependent()) {
    std::vector<cplx> table;
    if (const auto* s = std::get_if<SeparableSum>(&rep)) table = detail::x_independent_table(*s, p1, p2);
    else table = std::get<XIndependentSampled>(rep).values;
    for (std::size_t a = 0; a < b1; ++a)
      for (std::size_t b = 0; b < b2; ++b) {
        const double mag = std::abs(table[a * b2 + b]);
        peak = std::max(peak, mag);
        uncovered = std::max(uncovered, mag * std::abs(1.0 - c1[a] * c2[b]));
      }
  } else {
    const auto& g = std::get<GeneralSampled>(rep);
    const ScalarWindow x_cover = ScalarWindow::dyadic_rescale(ScalarWindow::lp_band(0), range.j_max);
    for (std::size_t a = 0; a < b1; ++a)
      for (std::size_t b = 0; b < b2; ++b) {
        std::vector<cplx> profile(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) profile[k] = g.values[(k * b1 + a) * b2 + b];
        const SpectralField spec = forward_transform(SampledField(grid, std::move(profile)));
        for_each_frequency(grid, [&](std::size_t i, std::span<const double> eta) {
          const double mag = std::abs(spec.values[i]);
          peak = std::max(peak, mag);
          uncovered = std::max(uncovered, mag * std::abs(1.0 - x_cover(eta) * c1[a] * c2[b]));
        });
      }
  }
  if (peak > 0.0 && uncovered > tolerance * peak)
    throw InvalidArgument("decomposition range does not cover the symbol's support (uncovered relative mass " +
                          std::to_string(uncovered / peak) + ")");

  std::vector<cplx> total(sigma.x_dependent() ? grid.size() * b1 * b2 : b1 * b2);
  std::vector<long> nu1(n), nu2(n);
  const long span_nu = range.nu_max - range.nu_min + 1;
  std::size_t cells = 1;
  for (std::size_t d = 0; d < n; ++d) cells *= static_cast<std::size_t>(span_nu);
  auto to_nu = [&](std::size_t idx, std::vector<long>& nu) {
    for (std::size_t d = n; d-- > 0;) {
      nu[d] = range.nu_min + static_cast<long>(idx % static_cast<std::size_t>(span_nu));
      idx /= static_cast<std::size_t>(span_nu);
    }
  };
  const int j_top = sigma.x_dependent() ? range.j_max : 0;
  for (int j = 0; j <= j_top; ++j)
    for (int k1 = 0; k1 <= range.k_max; ++k1)
      for (int k2 = 0; k2 <= range.k_max; ++k2)
        for (std::size_t c1i = 0; c1i < cells; ++c1i) {
          to_nu(c1i, nu1);
          for (std::size_t c2i = 0; c2i < cells; ++c2i) {
            to_nu(c2i, nu2);
            const SymbolPiece piece = decompose_symbol(sigma, grid, j, {k1, k2}, nu1, nu2);
            if (piece.zero) continue;
            const auto& prep = piece.symbol.representation();
            const LatticeBox& q1 = sigma.x_dependent() ? std::get<GeneralSampled>(prep).box1
                                                       : std::get<XIndependentSampled>(prep).box1;
            const LatticeBox& q2 = sigma.x_dependent() ? std::get<GeneralSampled>(prep).box2
                                                       : std::get<XIndependentSampled>(prep).box2;
            const auto& vals = sigma.x_dependent() ? std::get<GeneralSampled>(prep).values
                                                   : std::get<XIndependentSampled>(prep).values;
            const std::size_t qb1 = q1.size(), qb2 = q2.size();
            std::vector<long> m(n);
            for (std::size_t a = 0; a < qb1; ++a) {
              q1.signed_indices(a, m);
              const std::size_t A = *base1.position(m);
              for (std::size_t b = 0; b < qb2; ++b) {
                q2.signed_indices(b, m);
                const std::size_t B = *base2.position(m);
                if (sigma.x_dependent()) {
                  for (std::size_t k = 0; k < grid.size(); ++k)
                    total[(k * b1 + A) * b2 + B] += vals[(k * qb1 + a) * qb2 + b];
                } else {
                  total[A * b2 + B] += vals[a * qb2 + b];
                }
              }
            }
          }
        }
  if (sigma.x_dependent()) return Symbol(GeneralSampled{grid, base1, base2, std::move(total)});
  return Symbol(XIndependentSampled{grid, base1, base2, std::move(total)});
}

/// Samples any symbol on the lattice (full boxes for separable sums).
inline Symbol sample_symbol(const Symbol& sigma, const GridSpec& grid) {
  detail::require_symbol_grid(sigma, grid);
  if (const auto* s = std::get_if<SeparableSum>(&sigma.representation())) {
    const LatticeBox full = LatticeBox::full(grid);
    const auto p = detail::box_points(grid, full);
    return Symbol(XIndependentSampled{grid, full, full, detail::x_independent_table(*s, p, p)});
  }
  return sigma;
}

struct LeakageReport {
  /// Spectral l^2 mass of T outside the box, over the total mass (0 for zero output).
  double leakage = 0.0;
  double total_mass = 0.0;
  double half_width = 0.0;
};

/// Fraction of the spectral mass of T_{piece}(f1, f2) outside
/// nu1 + nu2 + [-w, w]^n with w = 2^{j+2} unless overridden.
inline LeakageReport support_check(const SymbolPiece& piece, const SampledField& f1, const SampledField& f2,
                                   std::optional<double> half_width = std::nullopt) {
  LeakageReport report;
  report.half_width = half_width.value_or(piece.output_half_width());
  const SampledField T = apply_bilinear(piece.symbol, f1, f2);
  const SpectralField spec = forward_transform(T);
  const auto center = piece.output_center();
  double inside = 0.0, outside = 0.0;
  for_each_frequency(spec.grid, [&](std::size_t i, std::span<const double> zeta) {
    bool in = true;
    for (std::size_t d = 0; d < zeta.size(); ++d)
      if (std::abs(zeta[d] - center[d]) > report.half_width * (1.0 + 1e-12)) in = false;
    (in ? inside : outside) += std::norm(spec.values[i]);
  });
  report.total_mass = inside + outside;
  report.leakage = report.total_mass > 0.0 ? outside / report.total_mass : 0.0;
  return report;
}

struct PointwiseBoundReport {
  /// max_x |T_{piece}(f1, f2)(x)| / (2^{w - jN} S(f1)(x) S(f2)(x)).
  double max_ratio = 0.0;
  /// Exponent w of the class weight for the piece's (k1, k2).
  double weight_exponent = 0.0;
};

/// Pointwise domination of a piece by the peak operator S = S_1.
inline PointwiseBoundReport pointwise_bound_check(const SymbolPiece& piece, const SampledField& f1,
                                                  const SampledField& f2, const ClassSpec& class_spec,
                                                  double decay_order) {
  class_spec.validate();
  PointwiseBoundReport report;
  report.weight_exponent = class_spec.band_weight_exponent(piece.K[0], piece.K[1]);
  const double weight = std::pow(2.0, report.weight_exponent - piece.j * decay_order);
  const SampledField T = apply_bilinear(piece.symbol, f1, f2);
  const SampledField s1 = peak_operator(f1, 1.0);
  const SampledField s2 = peak_operator(f2, 1.0);
  for (std::size_t k = 0; k < T.values.size(); ++k) {
    const double denom = weight * s1.values[k].real() * s2.values[k].real();
    if (denom > 0.0) report.max_ratio = std::max(report.max_ratio, std::abs(T.values[k]) / denom);
  }
  return report;
}

}  // namespace besovbilin

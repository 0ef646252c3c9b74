#pragma once

// Smooth frequency windows built from one C-infinity step
//   h(t) = eta(t) / (eta(t) + eta(1 - t)),  eta(t) = exp(-1/t) for t > 0, else 0,
// which is exactly 0 for t <= 0, exactly 1 for t >= 1, and satisfies
// h(t) + h(1 - t) = 1. Every window below is a composition of h, so supports
// are exact and both partitions of unity hold to rounding.

#include <besovbilin/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace besovbilin {

inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

/// One-dimensional cube-partition profile w(t) = h(1 - |t|); supp w = [-1, 1],
/// and sum_nu w(t - nu) = 1.
inline double cube_profile(double t) { return smoothstep(1.0 - std::abs(t)); }

namespace detail {
inline constexpr std::size_t kMaxWindowDimension = 8;

inline void check_window_dimension(std::size_t n) {
  if (n > kMaxWindowDimension) throw InvalidArgument("window evaluation supports at most 8 dimensions");
}

inline double euclidean_norm(std::span<const double> xi) {
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}
}  // namespace detail

class ScalarWindow {
 public:
  /// 1 on |xi| <= inner, 0 on |xi| >= outer.
  struct FlatBump {
    double inner;
    double outer;
  };
  /// 1 on r[1] <= |xi| <= r[2], 0 outside r[0] <= |xi| <= r[3].
  struct FlatAnnulus {
    std::array<double, 4> r;
  };
  /// base(2^{-scale_exponent} xi).
  struct DyadicRescale {
    std::shared_ptr<const ScalarWindow> base;
    int scale_exponent;
  };
  /// prod_i w((xi_i - center_i) / scale).
  struct CubeCell {
    std::vector<double> center;
    double scale = 1.0;
  };
  /// (1 + |xi|^2)^{s/2}.
  struct SobolevWeight {
    double s;
  };
  /// Named closed-form multipliers: "one", "zero", "gaussian" (exp(-|xi|^2/2)).
  struct Analytic {
    std::string tag;
  };
  /// Littlewood-Paley band psi_level.
  struct LpBand {
    int level;
  };
  /// base(xi - offset).
  struct Shifted {
    std::shared_ptr<const ScalarWindow> base;
    std::vector<double> offset;
  };
  struct CombinationTerm {
    double coefficient;
    std::shared_ptr<const ScalarWindow> window;
  };
  /// sum_t c_t w_t(xi).
  struct Combination {
    std::vector<CombinationTerm> terms;
  };

  using Kind = std::variant<FlatBump, FlatAnnulus, DyadicRescale, CubeCell, SobolevWeight, Analytic, LpBand,
                            Shifted, Combination>;

  ScalarWindow() : kind_(Analytic{"one"}) {}
  explicit ScalarWindow(Kind kind) : kind_(std::move(kind)) { validate(); }

  static ScalarWindow flat_bump(double inner, double outer) { return ScalarWindow(FlatBump{inner, outer}); }
  static ScalarWindow flat_annulus(double r1, double r2, double r3, double r4) {
    return ScalarWindow(FlatAnnulus{{r1, r2, r3, r4}});
  }
  static ScalarWindow dyadic_rescale(const ScalarWindow& base, int scale_exponent) {
    return ScalarWindow(DyadicRescale{std::make_shared<const ScalarWindow>(base), scale_exponent});
  }
  static ScalarWindow cube_cell(std::vector<double> center, double scale = 1.0) {
    return ScalarWindow(CubeCell{std::move(center), scale});
  }
  static ScalarWindow sobolev_weight(double s) { return ScalarWindow(SobolevWeight{s}); }
  static ScalarWindow analytic(std::string tag) { return ScalarWindow(Analytic{std::move(tag)}); }
  static ScalarWindow one() { return analytic("one"); }
  static ScalarWindow lp_band(int level) { return ScalarWindow(LpBand{level}); }
  static ScalarWindow shifted(const ScalarWindow& base, std::vector<double> offset) {
    return ScalarWindow(Shifted{std::make_shared<const ScalarWindow>(base), std::move(offset)});
  }
  static ScalarWindow combination(const std::vector<std::pair<double, ScalarWindow>>& terms) {
    Combination c;
    for (const auto& [coef, w] : terms) c.terms.push_back({coef, std::make_shared<const ScalarWindow>(w)});
    return ScalarWindow(std::move(c));
  }

  const Kind& kind() const { return kind_; }

  double operator()(std::span<const double> xi) const {
    return std::visit([&](const auto& k) { return eval(k, xi); }, kind_);
  }
  double operator()(double xi) const { return (*this)(std::span<const double>(&xi, 1)); }

 private:
  void validate() const {
    std::visit(
        [](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, FlatBump>) {
            if (!(k.inner >= 0.0 && k.outer > k.inner))
              throw InvalidArgument("flat_bump requires 0 <= inner < outer");
          } else if constexpr (std::is_same_v<T, FlatAnnulus>) {
            if (!(k.r[0] >= 0.0 && k.r[0] < k.r[1] && k.r[1] <= k.r[2] && k.r[2] < k.r[3]))
              throw InvalidArgument("flat_annulus requires 0 <= r1 < r2 <= r3 < r4");
          } else if constexpr (std::is_same_v<T, DyadicRescale> || std::is_same_v<T, Shifted>) {
            if (!k.base) throw InvalidArgument("window composition is missing its base window");
          } else if constexpr (std::is_same_v<T, CubeCell>) {
            if (k.center.empty() || !(k.scale > 0.0)) throw InvalidArgument("cube_cell needs a center and scale > 0");
          } else if constexpr (std::is_same_v<T, Analytic>) {
            if (k.tag != "one" && k.tag != "zero" && k.tag != "gaussian")
              throw InvalidArgument("unknown analytic window tag '" + k.tag + "'");
          } else if constexpr (std::is_same_v<T, LpBand>) {
            if (k.level < 0) throw InvalidArgument("lp_band level must be >= 0");
          } else if constexpr (std::is_same_v<T, Combination>) {
            for (const auto& t : k.terms) {
              if (!t.window) throw InvalidArgument("combination term without window");
              if (!std::isfinite(t.coefficient)) throw InvalidArgument("combination coefficient is not finite");
            }
          }
        },
        kind_);
  }

  static double eval(const FlatBump& k, std::span<const double> xi) {
    return smoothstep((k.outer - detail::euclidean_norm(xi)) / (k.outer - k.inner));
  }
  static double eval(const FlatAnnulus& k, std::span<const double> xi) {
    const double r = detail::euclidean_norm(xi);
    if (r <= k.r[0] || r >= k.r[3]) return 0.0;
    return smoothstep((r - k.r[0]) / (k.r[1] - k.r[0])) * smoothstep((k.r[3] - r) / (k.r[3] - k.r[2]));
  }
  static double eval(const DyadicRescale& k, std::span<const double> xi) {
    detail::check_window_dimension(xi.size());
    std::array<double, detail::kMaxWindowDimension> y{};
    for (std::size_t d = 0; d < xi.size(); ++d) y[d] = std::ldexp(xi[d], -k.scale_exponent);
    return (*k.base)(std::span<const double>(y.data(), xi.size()));
  }
  static double eval(const CubeCell& k, std::span<const double> xi) {
    if (k.center.size() != xi.size()) throw InvalidArgument("cube_cell dimension does not match frequency");
    double p = 1.0;
    for (std::size_t d = 0; d < xi.size() && p != 0.0; ++d) p *= cube_profile((xi[d] - k.center[d]) / k.scale);
    return p;
  }
  static double eval(const SobolevWeight& k, std::span<const double> xi) {
    const double r = detail::euclidean_norm(xi);
    return std::pow(1.0 + r * r, 0.5 * k.s);
  }
  static double eval(const Analytic& k, std::span<const double> xi) {
    if (k.tag == "one") return 1.0;
    if (k.tag == "zero") return 0.0;
    const double r = detail::euclidean_norm(xi);
    return std::exp(-0.5 * r * r);
  }
  static double eval(const LpBand& k, std::span<const double> xi) {
    // psi_0(xi) = h(2 - |xi|); psi_l(xi) = psi_0(2^{-l} xi) - psi_0(2^{1-l} xi).
    const double r = detail::euclidean_norm(xi);
    if (k.level == 0) return smoothstep(2.0 - r);
    const double outer = smoothstep(2.0 - std::ldexp(r, -k.level));
    const double inner = smoothstep(2.0 - std::ldexp(r, 1 - k.level));
    return std::max(0.0, outer - inner);
  }
  static double eval(const Shifted& k, std::span<const double> xi) {
    if (k.offset.size() != xi.size()) throw InvalidArgument("shift dimension does not match frequency");
    detail::check_window_dimension(xi.size());
    std::array<double, detail::kMaxWindowDimension> y{};
    for (std::size_t d = 0; d < xi.size(); ++d) y[d] = xi[d] - k.offset[d];
    return (*k.base)(std::span<const double>(y.data(), xi.size()));
  }
  static double eval(const Combination& k, std::span<const double> xi) {
    double s = 0.0;
    for (const auto& t : k.terms) s += t.coefficient * (*t.window)(xi);
    return s;
  }

  Kind kind_;
};

/// {psi_l}_{l = 0..l_max}; sum_{l <= l_max} psi_l(xi) = psi_0(2^{-l_max} xi), which is
/// 1 on |xi| <= 2^{l_max}.
inline std::vector<ScalarWindow> make_psi_family(int l_max) {
  if (l_max < 0) throw InvalidArgument("make_psi_family requires l_max >= 0");
  std::vector<ScalarWindow> family;
  family.reserve(static_cast<std::size_t>(l_max) + 1);
  for (int l = 0; l <= l_max; ++l) family.push_back(ScalarWindow::lp_band(l));
  return family;
}

/// phi(xi - nu) from the unit-cube partition of unity.
inline ScalarWindow make_cube_partition(std::span<const long> nu) {
  std::vector<double> c(nu.begin(), nu.end());
  return ScalarWindow::cube_cell(std::move(c));
}
inline ScalarWindow make_cube_partition(long nu) { return ScalarWindow::cube_cell({static_cast<double>(nu)}); }

/// Radial cutoff equal to 1 on [-1, 1]^n and supported in [-2, 2]^n.
inline ScalarWindow make_cube_dominator(int dimension) {
  return ScalarWindow::flat_bump(std::sqrt(static_cast<double>(dimension)), 2.0);
}

/// The three windows of the sharpness constructions.
struct SharpnessWindows {
  /// supp in |xi| <= 2^{1/2}, 1 on |xi| <= 2^{1/4}. Spectrum of the test bumps.
  ScalarWindow bump;
  /// supp in |xi| <= 2, 1 on |xi| <= 2^{1/2}.
  ScalarWindow cutoff;
  /// supp in 2^{-1/2} <= |xi| <= 2^{1/2}, 1 on 2^{-1/4} <= |xi| <= 2^{1/4}.
  ScalarWindow annulus;
};

inline SharpnessWindows make_sharpness_windows() {
  const double q = std::pow(2.0, 0.25);
  const double h = std::sqrt(2.0);
  return SharpnessWindows{ScalarWindow::flat_bump(q, h), ScalarWindow::flat_bump(h, 2.0),
                          ScalarWindow::flat_annulus(1.0 / h, 1.0 / q, q, h)};
}

}  // namespace besovbilin

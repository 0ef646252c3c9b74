#pragma once

// Periodic grid surrogate of R^n and the scaled DFT pair that realizes
//   F f(xi)      = int e^{-i x.xi} f(x) dx
//   F^{-1} F(x)  = (2 pi)^{-n} int e^{i x.xi} F(xi) dxi
// on the torus [-pi P, pi P)^n. Space samples sit at x_k = -pi P + k dx with
// dx = 2 pi P / N; frequencies are xi_m = m / P with m in [-N/2, N/2) stored in
// wraparound order (index i holds m = i for i < N/2, m = i - N otherwise).

#include <besovbilin/detail/fft.hpp>
#include <besovbilin/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace besovbilin {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridSpec {
  int dimension = 1;
  std::size_t samples_per_axis = std::size_t{1} << 14;
  double period_scale = 16.0;

  /// n = 1, N = 2^14, P = 16.
  static GridSpec desk() { return GridSpec{}; }

  void validate() const {
    if (dimension < 1) throw InvalidArgument("grid dimension must be >= 1");
    const std::size_t n = samples_per_axis;
    if (n < 2 || (n & (n - 1)) != 0)
      throw InvalidArgument("samples_per_axis must be a power of two >= 2, got " +
                            std::to_string(n));
    if (!(period_scale > 0.0) || !std::isfinite(period_scale))
      throw InvalidArgument("period_scale must be positive and finite");
  }

  std::size_t size() const {
    std::size_t total = 1;
    for (int d = 0; d < dimension; ++d) total *= samples_per_axis;
    return total;
  }

  double spacing() const { return 2.0 * kPi * period_scale / static_cast<double>(samples_per_axis); }
  double frequency_spacing() const { return 1.0 / period_scale; }
  /// Largest representable frequency magnitude along one axis, N / (2P).
  double nyquist() const { return static_cast<double>(samples_per_axis) / (2.0 * period_scale); }
  /// Largest |xi| over the whole lattice.
  double max_frequency_norm() const { return nyquist() * std::sqrt(static_cast<double>(dimension)); }

  double coordinate(std::size_t k) const {
    return -kPi * period_scale + static_cast<double>(k) * spacing();
  }

  long signed_index(std::size_t i) const {
    const auto half = static_cast<long>(samples_per_axis / 2);
    const auto si = static_cast<long>(i);
    return si < half ? si : si - static_cast<long>(samples_per_axis);
  }

  std::size_t wrap(long m) const {
    const auto n = static_cast<long>(samples_per_axis);
    long r = m % n;
    if (r < 0) r += n;
    return static_cast<std::size_t>(r);
  }

  double frequency(long m) const { return static_cast<double>(m) / period_scale; }

  /// Axis indices of a row-major flat index (last axis fastest).
  void unflatten(std::size_t flat, std::span<std::size_t> axes) const {
    for (int d = dimension - 1; d >= 0; --d) {
      axes[static_cast<std::size_t>(d)] = flat % samples_per_axis;
      flat /= samples_per_axis;
    }
  }

  std::size_t flatten(std::span<const std::size_t> axes) const {
    std::size_t flat = 0;
    for (int d = 0; d < dimension; ++d) flat = flat * samples_per_axis + axes[static_cast<std::size_t>(d)];
    return flat;
  }

  /// Signed lattice frequency indices of a flat spectral index.
  void signed_indices(std::size_t flat, std::span<long> m) const {
    for (int d = dimension - 1; d >= 0; --d) {
      m[static_cast<std::size_t>(d)] = signed_index(flat % samples_per_axis);
      flat /= samples_per_axis;
    }
  }

  /// Flat spectral index of signed lattice indices (wrapping each axis).
  std::size_t flat_of_signed(std::span<const long> m) const {
    std::size_t flat = 0;
    for (int d = 0; d < dimension; ++d) flat = flat * samples_per_axis + wrap(m[static_cast<std::size_t>(d)]);
    return flat;
  }

  bool operator==(const GridSpec&) const = default;
};

inline std::string describe(const GridSpec& g) {
  std::ostringstream os;
  os << "{n=" << g.dimension << ", N=" << g.samples_per_axis << ", P=" << g.period_scale << "}";
  return os.str();
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const std::string& what) {
  if (!(a == b))
    throw InvalidArgument("grid mismatch in " + what + ": " + describe(a) + " vs " + describe(b));
}

inline void require_finite(std::span<const cplx> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
      throw NumericError("non-finite value in " + what + " at index " + std::to_string(i));
  }
}

namespace detail {

template <class Derived>
struct FieldBase {
  GridSpec grid;
  std::vector<cplx> values;

  FieldBase() = default;
  FieldBase(GridSpec g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    grid.validate();
    if (values.size() != grid.size())
      throw InvalidArgument("field has " + std::to_string(values.size()) + " values, grid needs " +
                            std::to_string(grid.size()));
  }

  static Derived zeros(const GridSpec& g) { return Derived(g, std::vector<cplx>(g.size())); }

  Derived& operator+=(const Derived& other) {
    require_same_grid(grid, other.grid, "field addition");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
    return static_cast<Derived&>(*this);
  }
  Derived& operator-=(const Derived& other) {
    require_same_grid(grid, other.grid, "field subtraction");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
    return static_cast<Derived&>(*this);
  }
  Derived& operator*=(cplx c) {
    for (auto& v : values) v *= c;
    return static_cast<Derived&>(*this);
  }
  friend Derived operator+(Derived a, const Derived& b) { return a += b; }
  friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
  friend Derived operator*(cplx c, Derived a) { return a *= c; }
};

}  // namespace detail

/// Complex samples f(x_k) on the space lattice.
struct SampledField : detail::FieldBase<SampledField> {
  using FieldBase::FieldBase;
};

/// Complex samples F(xi_m) on the frequency lattice, wraparound order.
struct SpectralField : detail::FieldBase<SpectralField> {
  using FieldBase::FieldBase;
};

/// Samples fn(x) at every space lattice point; fn takes the n coordinates.
template <class Fn>
SampledField sample_field(const GridSpec& grid, Fn&& fn) {
  grid.validate();
  std::vector<cplx> values(grid.size());
  std::vector<std::size_t> axes(static_cast<std::size_t>(grid.dimension));
  std::vector<double> x(axes.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.unflatten(i, axes);
    for (std::size_t d = 0; d < axes.size(); ++d) x[d] = grid.coordinate(axes[d]);
    values[i] = cplx(fn(std::span<const double>(x)));
  }
  return SampledField(grid, std::move(values));
}

/// Calls fn(flat_index, xi) for every lattice frequency.
template <class Fn>
void for_each_frequency(const GridSpec& grid, Fn&& fn) {
  std::vector<long> m(static_cast<std::size_t>(grid.dimension));
  std::vector<double> xi(m.size());
  const std::size_t total = grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    grid.signed_indices(i, m);
    for (std::size_t d = 0; d < m.size(); ++d) xi[d] = grid.frequency(m[d]);
    fn(i, std::span<const double>(xi));
  }
}

/// Calls fn(flat_index, xi) for the lattice frequencies whose signed indices
/// lie in [lo_d, hi_d] on every axis (clipped to the lattice).
template <class Fn>
void for_each_frequency_in_box(const GridSpec& grid, std::span<const long> lo, std::span<const long> hi, Fn&& fn) {
  const auto n = static_cast<std::size_t>(grid.dimension);
  const long lattice_lo = -static_cast<long>(grid.samples_per_axis / 2);
  const long lattice_hi = static_cast<long>(grid.samples_per_axis / 2) - 1;
  std::vector<long> a(n), b(n), m(n);
  for (std::size_t d = 0; d < n; ++d) {
    a[d] = std::max(lo[d], lattice_lo);
    b[d] = std::min(hi[d], lattice_hi);
    if (a[d] > b[d]) return;
    m[d] = a[d];
  }
  std::vector<double> xi(n);
  while (true) {
    for (std::size_t d = 0; d < n; ++d) xi[d] = grid.frequency(m[d]);
    fn(grid.flat_of_signed(m), std::span<const double>(xi));
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++m[d] <= b[d]) break;
      m[d] = a[d];
      if (d == 0) return;
    }
  }
}

/// Samples fn(xi) at every lattice frequency.
template <class Fn>
SpectralField sample_spectrum(const GridSpec& grid, Fn&& fn) {
  grid.validate();
  std::vector<cplx> values(grid.size());
  for_each_frequency(grid, [&](std::size_t i, std::span<const double> xi) { values[i] = cplx(fn(xi)); });
  return SpectralField(grid, std::move(values));
}

namespace detail {

/// (-1)^(m_1 + ... + m_n) for a flat spectral index.
inline double lattice_sign(const GridSpec& grid, std::size_t flat) {
  long parity = 0;
  for (int d = 0; d < grid.dimension; ++d) {
    parity += grid.signed_index(flat % grid.samples_per_axis);
    flat /= grid.samples_per_axis;
  }
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

/// exp(2 pi i r / N) for r in [0, N), evaluated directly per entry.
inline std::vector<cplx> roots_of_unity(std::size_t n) {
  std::vector<cplx> w(n);
  for (std::size_t r = 0; r < n; ++r)
    w[r] = std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
  return w;
}

}  // namespace detail

/// exp(i x_k . xi_m) for space index k and signed frequency indices m.
class LatticePhase {
 public:
  explicit LatticePhase(const GridSpec& grid) : grid_(grid), roots_(detail::roots_of_unity(grid.samples_per_axis)) {}

  /// Axis factor exp(i x_k xi_m) = (-1)^m exp(2 pi i k m / N).
  cplx axis(std::size_t k, long m) const {
    const std::size_t n = grid_.samples_per_axis;
    const std::size_t r = (k * grid_.wrap(m)) % n;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * roots_[r];
  }

  cplx operator()(std::span<const std::size_t> k, std::span<const long> m) const {
    cplx p(1.0, 0.0);
    for (std::size_t d = 0; d < k.size(); ++d) p *= axis(k[d], m[d]);
    return p;
  }

 private:
  GridSpec grid_;
  std::vector<cplx> roots_;
};

/// F(xi_m) = dx^n sum_k exp(-i x_k . xi_m) f(x_k).
inline SpectralField forward_transform(const SampledField& f) {
  f.grid.validate();
  require_finite(f.values, "forward_transform input");
  auto out = detail::dft(f.values, f.grid.dimension, f.grid.samples_per_axis, FFTW_FORWARD);
  const double scale = std::pow(f.grid.spacing(), f.grid.dimension);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale * detail::lattice_sign(f.grid, i);
  return SpectralField(f.grid, std::move(out));
}

/// f(x_k) = (2 pi)^{-n} dxi^n sum_m exp(i x_k . xi_m) F(xi_m).
inline SampledField inverse_transform(const SpectralField& spec) {
  spec.grid.validate();
  require_finite(spec.values, "inverse_transform input");
  std::vector<cplx> in(spec.values.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = spec.values[i] * detail::lattice_sign(spec.grid, i);
  auto out = detail::dft(in, spec.grid.dimension, spec.grid.samples_per_axis, FFTW_BACKWARD);
  const double scale = std::pow(spec.grid.frequency_spacing() / (2.0 * kPi), spec.grid.dimension);
  for (auto& v : out) v *= scale;
  return SampledField(spec.grid, std::move(out));
}

/// Multiplies a spectrum by m(xi) in place. m returns a real or complex value.
template <class Multiplier>
void multiply_spectrum(const Multiplier& m, SpectralField& spec) {
  for_each_frequency(spec.grid, [&](std::size_t i, std::span<const double> xi) {
    const cplx factor(m(xi));
    if (!std::isfinite(factor.real()) || !std::isfinite(factor.imag())) {
      std::ostringstream os;
      os << "multiplier is not finite at frequency (";
      for (std::size_t d = 0; d < xi.size(); ++d) os << (d ? ", " : "") << xi[d];
      os << ")";
      throw NumericError(os.str());
    }
    spec.values[i] *= factor;
  });
}

/// m(D) f = F^{-1}[m F f].
template <class Multiplier>
SampledField apply_multiplier(const Multiplier& m, const SampledField& f) {
  auto spec = forward_transform(f);
  multiply_spectrum(m, spec);
  return inverse_transform(spec);
}

/// Riemann-sum L^p norm; p = kInf gives the max norm.
inline double lp_norm(std::span<const cplx> values, const GridSpec& grid, double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidArgument("lp_norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }
  const double cell = std::pow(grid.spacing(), grid.dimension);
  double sum = 0.0;
  if (p == 2.0) {
    for (const auto& v : values) sum += std::norm(v);
    return std::sqrt(sum * cell);
  }
  for (const auto& v : values) sum += std::pow(std::abs(v), p);
  return std::pow(sum * cell, 1.0 / p);
}

inline double lp_norm(const SampledField& f, double p) { return lp_norm(f.values, f.grid, p); }

/// Sup-norm relative deviation max|a - b| / max|b| (0 when both vanish).
inline double max_relative_error(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw InvalidArgument("max_relative_error: length mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  if (ref == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / ref;
}

}  // namespace besovbilin

#pragma once

// Besov and Sobolev norms of grid fields via Littlewood-Paley projections, and
// the peak operator S_R(f) = zeta_R * |f| with zeta_R(x) = R^n (1 + R|x|)^{-n-1}.

#include <besovbilin/grid_fourier.hpp>
#include <besovbilin/windows.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace besovbilin {

/// Smallest l with 2^l >= max |xi| on the lattice; with this cutoff
/// sum_{l <= l_max} psi_l = 1 at every lattice frequency.
inline int default_band_cutoff(const GridSpec& grid) {
  int l = 0;
  while (std::ldexp(1.0, l) < grid.max_frequency_norm()) ++l;
  return l;
}

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  /// Defaults to default_band_cutoff(grid).
  std::optional<int> l_max;

  int band_cutoff(const GridSpec& grid) const { return l_max.value_or(default_band_cutoff(grid)); }

  void validate(const GridSpec& grid) const {
    if (!std::isfinite(s)) throw InvalidArgument("Besov smoothness s must be finite");
    if (std::isnan(p) || p < 1.0) throw InvalidArgument("Besov integrability p must be >= 1");
    if (std::isnan(q) || q <= 0.0) throw InvalidArgument("Besov summability q must be > 0");
    if (l_max) {
      if (*l_max < 0) throw InvalidArgument("band cutoff l_max must be >= 0");
      if (std::ldexp(1.0, *l_max + 1) < grid.nyquist())
        throw InvalidArgument("band cutoff l_max too small: need 2^(l_max+1) >= Nyquist");
    }
  }
};

struct SobolevParams {
  double s = 0.0;
  double p = 2.0;

  void validate() const {
    if (!std::isfinite(s)) throw InvalidArgument("Sobolev smoothness s must be finite");
    if (std::isnan(p) || p < 1.0) throw InvalidArgument("Sobolev integrability p must be >= 1");
  }
};

/// psi_l(D) f.
inline SampledField lp_project(const SampledField& f, int level) {
  if (level < 0) throw InvalidArgument("lp_project requires level >= 0");
  return apply_multiplier(ScalarWindow::lp_band(level), f);
}

struct BandNorm {
  int level;
  double band_norm;
};

struct BesovResult {
  double norm = 0.0;
  std::vector<BandNorm> per_band;
};

/// ( sum_l 2^{l s q} ||psi_l(D) f||_{L^p}^q )^{1/q}; sup over l when q = inf.
/// Bands are aggregated in ascending order.
inline BesovResult besov_norm_detail(const SampledField& f, const BesovParams& params) {
  params.validate(f.grid);
  const int l_max = params.band_cutoff(f.grid);
  const SpectralField spectrum = forward_transform(f);
  BesovResult result;
  result.per_band.reserve(static_cast<std::size_t>(l_max) + 1);
  for (int l = 0; l <= l_max; ++l) {
    SpectralField band = spectrum;
    multiply_spectrum(ScalarWindow::lp_band(l), band);
    result.per_band.push_back({l, lp_norm(inverse_transform(band), params.p)});
  }
  if (std::isinf(params.q)) {
    for (const auto& b : result.per_band)
      result.norm = std::max(result.norm, std::pow(2.0, b.level * params.s) * b.band_norm);
    return result;
  }
  double sum = 0.0;
  for (const auto& b : result.per_band) sum += std::pow(std::pow(2.0, b.level * params.s) * b.band_norm, params.q);
  result.norm = std::pow(sum, 1.0 / params.q);
  return result;
}

inline double besov_norm(const SampledField& f, const BesovParams& params) {
  return besov_norm_detail(f, params).norm;
}

/// || F^{-1}[(1 + |xi|^2)^{s/2} F f] ||_{L^p}.
inline double sobolev_norm(const SampledField& f, const SobolevParams& params) {
  params.validate();
  if (params.s == 0.0) return lp_norm(f, params.p);
  return lp_norm(apply_multiplier(ScalarWindow::sobolev_weight(params.s), f), params.p);
}

/// Number of periods summed per axis on each side when periodizing zeta_R.
inline constexpr int kPeakKernelImages = 1;

/// zeta_R sampled at lattice offsets and periodized over 3 periods per axis.
inline std::vector<cplx> peak_kernel(const GridSpec& grid, double R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("peak operator requires R > 0");
  const auto n = static_cast<std::size_t>(grid.dimension);
  const double period = 2.0 * kPi * grid.period_scale;
  const double prefactor = std::pow(R, grid.dimension);
  std::vector<cplx> kernel(grid.size());
  std::vector<std::size_t> axes(n);
  std::vector<int> image(n);
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    grid.unflatten(i, axes);
    double total = 0.0;
    std::fill(image.begin(), image.end(), -kPeakKernelImages);
    while (true) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < n; ++d) {
        const double x = static_cast<double>(grid.signed_index(axes[d])) * grid.spacing() + image[d] * period;
        r2 += x * x;
      }
      total += prefactor * std::pow(1.0 + R * std::sqrt(r2), -(grid.dimension + 1));
      std::size_t d = n;
      bool done = true;
      while (d > 0) {
        --d;
        if (++image[d] <= kPeakKernelImages) {
          done = false;
          break;
        }
        image[d] = -kPeakKernelImages;
      }
      if (done) break;
    }
    kernel[i] = total;
  }
  return kernel;
}

/// Periodic convolution of |f| with the periodized zeta_R.
inline SampledField peak_operator(const SampledField& f, double R) {
  require_finite(f.values, "peak_operator input");
  const GridSpec& grid = f.grid;
  std::vector<cplx> magnitude(f.values.size());
  for (std::size_t i = 0; i < magnitude.size(); ++i) magnitude[i] = std::abs(f.values[i]);
  const auto kernel_hat = detail::dft(peak_kernel(grid, R), grid.dimension, grid.samples_per_axis, FFTW_FORWARD);
  auto g_hat = detail::dft(magnitude, grid.dimension, grid.samples_per_axis, FFTW_FORWARD);
  for (std::size_t i = 0; i < g_hat.size(); ++i) g_hat[i] *= kernel_hat[i];
  auto out = detail::dft(g_hat, grid.dimension, grid.samples_per_axis, FFTW_BACKWARD);
  const double scale = std::pow(grid.spacing(), grid.dimension) / static_cast<double>(grid.size());
  for (auto& v : out) v = std::max(0.0, v.real() * scale);
  return SampledField(grid, std::move(out));
}

/// Field with values |f|^2.
inline SampledField squared_magnitude(const SampledField& f) {
  SampledField out = f;
  for (auto& v : out.values) v = std::norm(v);
  return out;
}

struct SquareFunctionReport {
  /// || (sum_nu |phi(R^{-1}(D - nu)) f|^2)^{1/2} ||_{L^{p~}}
  double square_norm = 0.0;
  /// R^{n(1/2 + 1/p - 1/p~)} ||f||_{L^p}
  double normalizer = 0.0;
  double ratio = 0.0;
  /// max_x (sum_nu |...|^2)^{1/2}(x) / (R^{n/2} S_R(|f|^2)(x)^{1/2})
  double pointwise_constant = 0.0;
  std::size_t cells = 0;
};

/// Square function of f over the unit-lattice cube partition dilated by R.
/// Cells cover the whole lattice band.
inline SampledField cube_square_function(const SampledField& f, double R, std::size_t* cells_used = nullptr) {
  if (!(R >= 1.0)) throw InvalidArgument("square function requires R >= 1");
  const GridSpec& grid = f.grid;
  const auto n = static_cast<std::size_t>(grid.dimension);
  const SpectralField spectrum = forward_transform(f);
  const long reach = static_cast<long>(std::ceil(grid.nyquist() + R)) + 1;
  std::vector<double> accum(grid.size(), 0.0);
  std::vector<long> nu(n, -reach);
  std::vector<long> lo(n), hi(n);
  std::size_t cells = 0;
  while (true) {
    std::vector<double> center(nu.begin(), nu.end());
    const ScalarWindow cell = ScalarWindow::cube_cell(center, R);
    SpectralField piece = SpectralField::zeros(grid);
    for (std::size_t d = 0; d < n; ++d) {
      lo[d] = static_cast<long>(std::floor((center[d] - R) * grid.period_scale));
      hi[d] = static_cast<long>(std::ceil((center[d] + R) * grid.period_scale));
    }
    bool any = false;
    for_each_frequency_in_box(grid, lo, hi, [&](std::size_t i, std::span<const double> xi) {
      const double w = cell(xi);
      if (w != 0.0 && spectrum.values[i] != cplx(0.0)) {
        piece.values[i] = w * spectrum.values[i];
        any = true;
      }
    });
    if (any) {
      ++cells;
      const SampledField g = inverse_transform(piece);
      for (std::size_t i = 0; i < accum.size(); ++i) accum[i] += std::norm(g.values[i]);
    }
    std::size_t d = n;
    bool done = true;
    while (d > 0) {
      --d;
      if (++nu[d] <= reach) {
        done = false;
        break;
      }
      nu[d] = -reach;
    }
    if (done) break;
  }
  if (cells_used) *cells_used = cells;
  std::vector<cplx> out(accum.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(accum[i]);
  return SampledField(grid, std::move(out));
}

/// Measures the dyadic square-function estimate: the ratio of the square-function
/// L^{p~} norm to R^{n(1/2 + 1/p - 1/p~)} ||f||_{L^p}, plus the pointwise constant
/// against R^{n/2} S_R(|f|^2)^{1/2}.
inline SquareFunctionReport square_function_check(const SampledField& f, double R, double p, double p_tilde) {
  if (!(R >= 1.0)) throw InvalidArgument("square_function_check requires R >= 1");
  if (!(p >= 2.0 && p_tilde >= p)) throw InvalidArgument("square_function_check requires 2 <= p <= p~ <= inf");
  const GridSpec& grid = f.grid;
  SquareFunctionReport report;
  const double n = grid.dimension;
  const double inv_pt = std::isinf(p_tilde) ? 0.0 : 1.0 / p_tilde;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  report.normalizer = std::pow(R, n * (0.5 + inv_p - inv_pt)) * lp_norm(f, p);
  if (report.normalizer == 0.0) return report;

  const SampledField square = cube_square_function(f, R, &report.cells);
  report.square_norm = lp_norm(square, p_tilde);
  report.ratio = report.square_norm / report.normalizer;

  const SampledField peak = peak_operator(squared_magnitude(f), R);
  const double scale = std::pow(R, 0.5 * n);
  for (std::size_t i = 0; i < square.values.size(); ++i) {
    const double denom = scale * std::sqrt(peak.values[i].real());
    if (denom > 0.0) report.pointwise_constant = std::max(report.pointwise_constant, square.values[i].real() / denom);
  }
  return report;
}

}  // namespace besovbilin

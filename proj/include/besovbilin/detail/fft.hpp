#pragma once

// Thin FFTW wrapper: unnormalized multi-dimensional complex DFTs with a
// process-wide plan cache. Planning is serialized; execution uses the
// new-array interface and is safe to call concurrently.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace besovbilin::detail {

using cplx = std::complex<double>;

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const std::vector<int>& dims, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(dims, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    std::vector<cplx> in(total), out(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                                   reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

/// out[m] = sum_k in[k] exp(sign * 2 pi i k.m / N), row-major n-dimensional.
inline std::vector<cplx> dft(std::span<const cplx> in, int dimension, std::size_t samples_per_axis,
                             int sign) {
  std::vector<int> dims(static_cast<std::size_t>(dimension), static_cast<int>(samples_per_axis));
  fftw_plan plan = PlanCache::instance().get(dims, sign);
  std::vector<cplx> src(in.begin(), in.end());
  std::vector<cplx> out(in.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace besovbilin::detail

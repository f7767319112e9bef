#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace gpspec::fft {

using Complex = std::complex<double>;

enum class Direction : int { kForward = FFTW_FORWARD, kBackward = FFTW_BACKWARD };

namespace detail {

// The FFTW planner is not thread-safe; executing an existing plan on new arrays is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, Direction dir) {
    const auto key = std::make_tuple(dim, n, static_cast<int>(dir));
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    int dims[3] = {n, n, n};
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan plan = fftw_plan_dft(dim, dims, scratch, scratch, static_cast<int>(dir),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized in-place DFT of an n^d row-major array (last axis fastest).
/// Forward uses exp(-i...), backward exp(+i...).
inline void transform(std::vector<Complex>& data, int dim, int n, Direction dir) {
  fftw_plan plan = detail::PlanCache::instance().get(dim, n, dir);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace gpspec::fft

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "crossdiff/errors.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/version.hpp"

namespace crossdiff {

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_malloc(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// Planning is not thread-safe in FFTW; execution with new-array functions is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    FftwBuffer real(sizeof(double) * static_cast<std::size_t>(n));
    FftwBuffer spec(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1));
    auto* r = static_cast<double*>(real.ptr);
    auto* c = static_cast<fftw_complex*>(spec.ptr);
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(n, r, c, FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_1d(n, c, r, FFTW_ESTIMATE);
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

int smooth_size(int at_least) {
  for (int n = at_least;; ++n) {
    int r = n;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return n;
  }
}

}  // namespace

std::string fftw_version_string() { return fftw_version; }

Field convolve_fft(const Field& density, const SampledKernel& kernel) {
  const GridSpec& g = density.grid();
  const int n = g.n_cells;
  const int m = kernel.half();
  if (kernel.weights.size() % 2 != 1 || static_cast<int>(kernel.weights.size()) > n) {
    throw DomainError("kernel stencil is wider than the grid");
  }
  const bool periodic = g.boundary == Boundary::Periodic;
  const int size = periodic ? n : smooth_size(n + m);
  const int bins = size / 2 + 1;
  const PlanPair plan = plan_cache().get(size);

  FftwBuffer f_real(sizeof(double) * size), k_real(sizeof(double) * size);
  FftwBuffer f_spec(sizeof(fftw_complex) * bins), k_spec(sizeof(fftw_complex) * bins);
  auto* fr = static_cast<double*>(f_real.ptr);
  auto* kr = static_cast<double*>(k_real.ptr);
  auto* fs = static_cast<fftw_complex*>(f_spec.ptr);
  auto* ks = static_cast<fftw_complex*>(k_spec.ptr);

  for (int i = 0; i < size; ++i) fr[i] = i < n ? density[static_cast<std::size_t>(i)] : 0.0;
  for (int i = 0; i < size; ++i) kr[i] = 0.0;
  for (int k = -m; k <= m; ++k) kr[(k + size) % size] += kernel.at(k);

  fftw_execute_dft_r2c(plan.forward, fr, fs);
  fftw_execute_dft_r2c(plan.forward, kr, ks);
  for (int b = 0; b < bins; ++b) {
    const std::complex<double> prod = std::complex<double>(fs[b][0], fs[b][1]) * std::complex<double>(ks[b][0], ks[b][1]);
    fs[b][0] = prod.real();
    fs[b][1] = prod.imag();
  }
  fftw_execute_dft_c2r(plan.backward, fs, fr);

  Field out(g);
  const double scale = g.dx() / size;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = scale * fr[i];
  return out;
}

}  // namespace crossdiff

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "ghostkit/errors.hpp"

namespace ghostkit::fft {

namespace detail {
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace detail

/// In-place 2-D complex single-precision transform pair with its own
/// aligned workspace. Plans use FFTW_ESTIMATE so planning never depends
/// on runtime measurement, keeping output bytes stable across runs.
/// Plan creation/destruction is serialized; execution is lock-free, so
/// each worker thread should own (or thread-cache) its instance.
class Fft2D {
public:
  Fft2D(std::uint32_t width, std::uint32_t height)
      : n_(static_cast<std::size_t>(width) * height) {
    if (n_ == 0)
      throw precondition_error("transform dimensions must be positive");
    buf_ = static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * n_));
    if (!buf_)
      throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    fwd_ = fftwf_plan_dft_2d(static_cast<int>(height), static_cast<int>(width),
                             buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftwf_plan_dft_2d(static_cast<int>(height), static_cast<int>(width),
                             buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  ~Fft2D() {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    fftwf_destroy_plan(fwd_);
    fftwf_destroy_plan(inv_);
    fftwf_free(buf_);
  }

  std::size_t size() const { return n_; }

  std::complex<float>* buffer() {
    return reinterpret_cast<std::complex<float>*>(buf_);
  }

  /// Unnormalized forward transform of the workspace, in place.
  void forward() { fftwf_execute(fwd_); }
  /// Unnormalized inverse transform; forward∘inverse scales by size().
  void inverse() { fftwf_execute(inv_); }

  /// Per-thread instance for the given shape, created on first use.
  static Fft2D& thread_cached(std::uint32_t width, std::uint32_t height) {
    thread_local std::map<std::uint64_t, std::unique_ptr<Fft2D>> cache;
    const std::uint64_t key = (static_cast<std::uint64_t>(width) << 32) | height;
    auto& slot = cache[key];
    if (!slot)
      slot = std::make_unique<Fft2D>(width, height);
    return *slot;
  }

private:
  std::size_t n_;
  fftwf_complex* buf_;
  fftwf_plan fwd_;
  fftwf_plan inv_;
};

} // namespace ghostkit::fft

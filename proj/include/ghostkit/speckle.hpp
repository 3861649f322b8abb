#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ghostkit/errors.hpp"
#include "ghostkit/fft.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/rng.hpp"

namespace ghostkit {

/// Pseudothermal source description. A_coh, the average speckle area,
/// is approximately pi * speckle_radius^2.
struct SourceConfig {
  std::uint32_t width = 128;
  std::uint32_t height = 128;
  double speckle_radius = 2.0;
  double mean_intensity = 1.0;
  std::uint64_t master_seed = 42;

  void validate() const {
    if (width < 1 || height < 1)
      throw config_error("source dimensions must be at least 1x1");
    if (!(speckle_radius >= 0.0))
      throw config_error("speckle_radius must be >= 0");
    if (!(mean_intensity > 0.0))
      throw config_error("mean_intensity must be > 0");
  }
};

/// One speckle realization at the detector plane.
struct IntensityFrame {
  Grid<float> data;
  std::uint64_t index = 0;
};

namespace detail {

// Gaussian spatial-frequency filter for a given shape and radius, plus the
// intensity scale that makes the ensemble mean of |filtered field|^2 equal
// one. The filter is chosen so the intensity autocovariance falls to 1/e
// at a pixel lag of speckle_radius (field correlation exp(-d^2 / 2r^2)).
struct SpeckleFilter {
  std::vector<float> h;
  double scale; // applied to |unnormalized inverse FFT|^2

  SpeckleFilter(std::uint32_t width, std::uint32_t height, double radius) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    h.resize(n);
    constexpr double pi = 3.14159265358979323846;
    const double pr2 = pi * pi * radius * radius;
    double sum_h2 = 0.0;
    std::size_t i = 0;
    for (std::uint32_t y = 0; y < height; ++y) {
      const double fy = (y <= height / 2 ? static_cast<double>(y)
                                         : static_cast<double>(y) - height) /
                        height;
      for (std::uint32_t x = 0; x < width; ++x, ++i) {
        const double fx = (x <= width / 2 ? static_cast<double>(x)
                                          : static_cast<double>(x) - width) /
                          width;
        const double v = std::exp(-pr2 * (fx * fx + fy * fy));
        h[i] = static_cast<float>(v);
        sum_h2 += v * v;
      }
    }
    // E|field|^2 after unnormalized forward+inverse is n * sum(H^2).
    scale = 1.0 / (static_cast<double>(n) * sum_h2);
  }

  static const SpeckleFilter& thread_cached(std::uint32_t width, std::uint32_t height,
                                            double radius) {
    struct Key {
      std::uint64_t shape;
      std::uint64_t radius_bits;
      auto operator<=>(const Key&) const = default;
    };
    thread_local std::map<Key, SpeckleFilter> cache;
    const Key key{(static_cast<std::uint64_t>(width) << 32) | height,
                  std::bit_cast<std::uint64_t>(radius)};
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, SpeckleFilter(width, height, radius)).first;
    return it->second;
  }
};

} // namespace detail

/// Synthesize speckle frame m. Pure function of (config, m): any frame can
/// be regenerated independently, in any order, on any number of workers.
inline IntensityFrame generate_frame(const SourceConfig& config, std::uint64_t m) {
  config.validate();
  const std::uint32_t w = config.width, h = config.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  constexpr float inv_sqrt2 = 0.70710678f;

  IntensityFrame frame{Grid<float>(w, h), m};

  if (config.speckle_radius == 0.0) {
    // White field: the filter is identity, no transform needed.
    const float mi = static_cast<float>(config.mean_intensity);
    for (std::size_t p = 0; p < n; ++p) {
      rng::PixelStream st(config.master_seed, m, static_cast<std::uint32_t>(p),
                          rng::Stream::field);
      const float re = st.normal() * inv_sqrt2;
      const float im = st.normal() * inv_sqrt2;
      frame.data[p] = mi * (re * re + im * im);
    }
    return frame;
  }

  auto& fft = fft::Fft2D::thread_cached(w, h);
  std::complex<float>* buf = fft.buffer();
  for (std::size_t p = 0; p < n; ++p) {
    rng::PixelStream st(config.master_seed, m, static_cast<std::uint32_t>(p),
                        rng::Stream::field);
    buf[p] = {st.normal() * inv_sqrt2, st.normal() * inv_sqrt2};
  }

  const auto& filter =
      detail::SpeckleFilter::thread_cached(w, h, config.speckle_radius);
  fft.forward();
  for (std::size_t p = 0; p < n; ++p)
    buf[p] *= filter.h[p];
  fft.inverse();

  const float scale = static_cast<float>(config.mean_intensity * filter.scale);
  for (std::size_t p = 0; p < n; ++p)
    frame.data[p] = scale * std::norm(buf[p]);
  return frame;
}

/// Sample statistics over a stack of frames: per-pixel mean, per-pixel
/// contrast (std/mean, N-1 denominator), and the pooled contrast scalar.
struct FrameStatistics {
  Grid<double> mean;
  Grid<double> contrast;
  double pooled_contrast = 0.0;
};

inline FrameStatistics frame_statistics(const std::vector<IntensityFrame>& frames) {
  if (frames.size() < 2)
    throw insufficient_data_error("frame_statistics needs at least 2 frames");
  const auto& first = frames.front().data;
  for (const auto& f : frames)
    require_same_shape(first, f.data, "frame_statistics");

  const std::size_t n = first.size();
  const double count = static_cast<double>(frames.size());
  Grid<double> mean(first.width(), first.height());
  Grid<double> m2(first.width(), first.height());

  for (const auto& f : frames)
    for (std::size_t p = 0; p < n; ++p)
      mean[p] += f.data[p];
  for (std::size_t p = 0; p < n; ++p)
    mean[p] /= count;
  for (const auto& f : frames)
    for (std::size_t p = 0; p < n; ++p) {
      const double d = f.data[p] - mean[p];
      m2[p] += d * d;
    }

  FrameStatistics out;
  out.mean = mean;
  out.contrast = Grid<double>(first.width(), first.height());
  double var_sum = 0.0, mean_sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double var = m2[p] / (count - 1.0);
    out.contrast[p] = mean[p] != 0.0 ? std::sqrt(var) / mean[p] : 0.0;
    var_sum += var;
    mean_sum += mean[p];
  }
  const double pooled_mean = mean_sum / static_cast<double>(n);
  out.pooled_contrast =
      pooled_mean != 0.0 ? std::sqrt(var_sum / static_cast<double>(n)) / pooled_mean
                         : 0.0;
  return out;
}

} // namespace ghostkit

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ghostkit/errors.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/image_io.hpp"

namespace ghostkit {

/// Object transmission function T(x), values in [0,1]. Doubles as the
/// ground truth for scoring.
struct TransmissionMask {
  Grid<double> data;
  std::string name;

  void validate() const {
    for (double v : data)
      if (!(v >= 0.0 && v <= 1.0))
        throw config_error("mask '" + name + "' has values outside [0,1]");
  }

  double mean() const {
    double s = 0.0;
    for (double v : data)
      s += v;
    return s / static_cast<double>(data.size());
  }
};

enum class MaskKind { grayscale_chart, binary_letters, uniform };

namespace detail {

// 5x7 glyph bitmaps, row-major, '1' = opaque stroke.
inline const char* glyph_rows(char c) {
  switch (c) {
  case 'G':
    return "01110"
           "10001"
           "10000"
           "10111"
           "10001"
           "10001"
           "01110";
  case 'K':
    return "10001"
           "10010"
           "10100"
           "11000"
           "10100"
           "10010"
           "10001";
  default:
    return "00000"
           "00000"
           "00000"
           "00000"
           "00000"
           "00000"
           "00000";
  }
}

// Paint the glyph into [x0,x0+gw) x [y0,y0+gh) by nearest-neighbor lookup.
inline void paint_glyph(Grid<double>& img, char c, std::uint32_t x0, std::uint32_t y0,
                        std::uint32_t gw, std::uint32_t gh) {
  const char* rows = glyph_rows(c);
  for (std::uint32_t y = 0; y < gh; ++y)
    for (std::uint32_t x = 0; x < gw; ++x) {
      const std::uint32_t fx = x * 5 / gw;
      const std::uint32_t fy = y * 7 / gh;
      if (rows[fy * 5 + fx] == '1')
        img(x0 + x, y0 + y) = 0.0;
    }
}

} // namespace detail

/// Generated test objects. The chart combines an 8-step gray wedge (top,
/// mirrored at bottom) with black glyphs on white, covering the full
/// transmission range; binary_letters is the same glyphs in pure 0/1.
inline TransmissionMask builtin_mask(MaskKind kind, std::uint32_t width,
                                     std::uint32_t height, double t = 1.0) {
  if (width < 1 || height < 1)
    throw config_error("mask dimensions must be at least 1x1");

  if (kind == MaskKind::uniform) {
    if (!(t >= 0.0 && t <= 1.0))
      throw config_error("uniform mask level must be in [0,1]");
    return {Grid<double>(width, height, t), "uniform"};
  }

  if (width < 8 || height < 8)
    throw config_error("chart masks need dimensions of at least 8x8");

  Grid<double> img(width, height, 1.0);
  const std::uint32_t band = height / 4;

  if (kind == MaskKind::grayscale_chart) {
    for (std::uint32_t y = 0; y < band; ++y)
      for (std::uint32_t x = 0; x < width; ++x) {
        const std::uint32_t level = x * 8 / width; // 8 steps, 0 .. 1 inclusive
        img(x, y) = static_cast<double>(level) / 7.0;
        img(x, height - 1 - y) = static_cast<double>(7 - level) / 7.0;
      }
  } else {
    // binary_letters keeps the bands white; only the glyphs are opaque.
  }

  const std::uint32_t mid_h = height - 2 * band;
  const std::uint32_t gh = std::max<std::uint32_t>(3, mid_h * 3 / 4);
  const std::uint32_t gw = std::max<std::uint32_t>(2, width * 3 / 10);
  const std::uint32_t gy = band + (mid_h - gh) / 2;
  const std::uint32_t gap = (width - 2 * gw) / 3;
  detail::paint_glyph(img, 'G', gap, gy, gw, gh);
  detail::paint_glyph(img, 'K', 2 * gap + gw, gy, gw, gh);

  return {std::move(img),
          kind == MaskKind::grayscale_chart ? "grayscale-chart" : "binary-letters"};
}

/// Load a mask from an 8-bit grayscale PGM or PNG; dimensions must match
/// the acquisition frame size exactly (no resampling).
inline TransmissionMask load_mask(const std::string& path, std::uint32_t width,
                                  std::uint32_t height) {
  const Grid<std::uint8_t> img = io::read_image(path);
  if (img.width() != width || img.height() != height)
    throw shape_error("mask " + path + " is " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + ", need " +
                      std::to_string(width) + "x" + std::to_string(height));
  Grid<double> data(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i)
    data[i] = static_cast<double>(img[i]) / 255.0;
  return {std::move(data), path};
}

/// Quantize to 8 bits and write as PGM; load_mask of the result matches the
/// original up to the 1/255 grid.
inline void save_mask_pgm(const TransmissionMask& mask, const std::string& path) {
  Grid<std::uint8_t> img(mask.data.width(), mask.data.height());
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    img[i] = static_cast<std::uint8_t>(std::lround(mask.data[i] * 255.0));
  io::write_pgm(img, path);
}

} // namespace ghostkit

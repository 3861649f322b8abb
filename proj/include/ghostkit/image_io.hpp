#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "ghostkit/errors.hpp"
#include "ghostkit/grid.hpp"

namespace ghostkit::io {

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad())
    throw io_error("read failed: " + path);
  return bytes;
}

inline void write_file(const std::string& path, const std::uint8_t* data,
                       std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out)
    throw io_error("write failed: " + path);
}

inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

} // namespace detail

// ---------------------------------------------------------------- PGM (P5)

inline Grid<std::uint8_t> decode_pgm(const std::vector<std::uint8_t>& bytes,
                                     const std::string& origin) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    // Skip whitespace and '#' comment lines between header tokens.
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n')
          ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#')
        break;
      ++pos;
    }
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  };

  const std::string magic = next_token();
  if (magic != "P5") {
    if (magic == "P6")
      throw format_error(origin + ": color PPM not supported, need grayscale P5");
    throw format_error(origin + ": not a binary PGM (P5) file");
  }
  const std::string ws = next_token(), hs = next_token(), maxs = next_token();
  unsigned long w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(ws);
    h = std::stoul(hs);
    maxval = std::stoul(maxs);
  } catch (const std::exception&) {
    throw format_error(origin + ": malformed PGM header");
  }
  if (w == 0 || h == 0)
    throw format_error(origin + ": zero PGM dimensions");
  if (maxval != 255)
    throw format_error(origin + ": PGM maxval must be 255, got " +
                       std::to_string(maxval));
  if (pos < bytes.size())
    ++pos; // single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < need)
    throw corruption_error(origin + ": PGM pixel data truncated", pos);

  Grid<std::uint8_t> img(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h));
  std::memcpy(img.data(), bytes.data() + pos, need);
  return img;
}

inline Grid<std::uint8_t> read_pgm(const std::string& path) {
  return decode_pgm(detail::read_file(path), path);
}

inline std::vector<std::uint8_t> encode_pgm(const Grid<std::uint8_t>& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data(), img.data() + img.size());
  return out;
}

inline void write_pgm(const Grid<std::uint8_t>& img, const std::string& path) {
  const auto bytes = encode_pgm(img);
  detail::write_file(path, bytes.data(), bytes.size());
}

// ------------------------------------------------- PNG, 8-bit grayscale only

namespace detail {

constexpr std::array<std::uint8_t, 8> png_signature = {0x89, 'P', 'N', 'G',
                                                       0x0D, 0x0A, 0x1A, 0x0A};

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc)
    return static_cast<std::uint8_t>(a);
  if (pb <= pc)
    return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

} // namespace detail

inline Grid<std::uint8_t> decode_png(const std::vector<std::uint8_t>& bytes,
                                     const std::string& origin) {
  using detail::be32;
  if (bytes.size() < 8 ||
      !std::equal(detail::png_signature.begin(), detail::png_signature.end(),
                  bytes.begin()))
    throw format_error(origin + ": not a PNG file");

  std::uint32_t width = 0, height = 0;
  bool have_ihdr = false, have_iend = false;
  std::vector<std::uint8_t> idat;

  std::size_t pos = 8;
  while (!have_iend) {
    if (bytes.size() - pos < 12)
      throw corruption_error(origin + ": PNG chunk stream truncated", pos);
    const std::uint32_t len = be32(&bytes[pos]);
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    if (bytes.size() - pos - 12 < len)
      throw corruption_error(origin + ": PNG chunk data truncated", pos);
    const std::uint8_t* data = &bytes[pos + 8];

    const std::uint32_t stored_crc = be32(&bytes[pos + 8 + len]);
    const std::uint32_t actual_crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, &bytes[pos + 4], 4), data, len));
    if (stored_crc != actual_crc)
      throw corruption_error(origin + ": PNG chunk CRC mismatch", pos + 8 + len);

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13)
        throw format_error(origin + ": bad IHDR length");
      width = be32(data);
      height = be32(data + 4);
      const std::uint8_t depth = data[8], color = data[9], interlace = data[12];
      if (color != 0)
        throw format_error(origin + ": PNG color type " + std::to_string(color) +
                           " not supported, need 8-bit grayscale");
      if (depth != 8)
        throw format_error(origin + ": PNG bit depth " + std::to_string(depth) +
                           " not supported, need 8");
      if (interlace != 0)
        throw format_error(origin + ": interlaced PNG not supported");
      if (width == 0 || height == 0)
        throw format_error(origin + ": zero PNG dimensions");
      have_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      if (!have_ihdr)
        throw format_error(origin + ": IDAT before IHDR");
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      have_iend = true;
    }
    // Ancillary chunks (tEXt, pHYs, ...) are skipped.
    pos += 12 + len;
  }
  if (!have_ihdr)
    throw format_error(origin + ": missing IHDR");

  // One filter byte plus `width` samples per row.
  const std::size_t stride = static_cast<std::size_t>(width) + 1;
  const std::size_t raw_size = stride * height;
  std::vector<std::uint8_t> raw(raw_size);

  z_stream strm{};
  if (inflateInit(&strm) != Z_OK)
    throw io_error(origin + ": zlib init failed");
  strm.next_in = idat.data();
  strm.avail_in = static_cast<uInt>(idat.size());
  strm.next_out = raw.data();
  strm.avail_out = static_cast<uInt>(raw_size);
  const int ret = inflate(&strm, Z_FINISH);
  const std::size_t got = raw_size - strm.avail_out;
  inflateEnd(&strm);
  if (ret != Z_STREAM_END || got != raw_size)
    throw corruption_error(origin + ": PNG image data incomplete", got);

  Grid<std::uint8_t> img(width, height);
  std::vector<std::uint8_t> prev(width, 0);
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t filter = raw[y * stride];
    std::uint8_t* row = &raw[y * stride + 1];
    switch (filter) {
    case 0:
      break;
    case 1:
      for (std::uint32_t x = 1; x < width; ++x)
        row[x] = static_cast<std::uint8_t>(row[x] + row[x - 1]);
      break;
    case 2:
      for (std::uint32_t x = 0; x < width; ++x)
        row[x] = static_cast<std::uint8_t>(row[x] + prev[x]);
      break;
    case 3:
      for (std::uint32_t x = 0; x < width; ++x) {
        const int left = x > 0 ? row[x - 1] : 0;
        row[x] = static_cast<std::uint8_t>(row[x] + (left + prev[x]) / 2);
      }
      break;
    case 4:
      for (std::uint32_t x = 0; x < width; ++x) {
        const int left = x > 0 ? row[x - 1] : 0;
        const int upleft = x > 0 ? prev[x - 1] : 0;
        row[x] = static_cast<std::uint8_t>(row[x] +
                                           detail::paeth(left, prev[x], upleft));
      }
      break;
    default:
      throw corruption_error(origin + ": unknown PNG filter type " +
                             std::to_string(filter));
    }
    std::memcpy(&img(0, y), row, width);
    std::memcpy(prev.data(), row, width);
  }
  return img;
}

inline Grid<std::uint8_t> read_png(const std::string& path) {
  return decode_png(detail::read_file(path), path);
}

inline std::vector<std::uint8_t> encode_png(const Grid<std::uint8_t>& img) {
  using detail::put_be32;
  std::vector<std::uint8_t> out(detail::png_signature.begin(),
                                detail::png_signature.end());

  auto put_chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, &out[type_pos], static_cast<uInt>(4 + data.size())));
    put_be32(out, crc);
  };

  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, img.width());
  put_be32(ihdr, img.height());
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0}); // depth 8, grayscale, no interlace
  put_chunk("IHDR", ihdr);

  const std::size_t stride = static_cast<std::size_t>(img.width()) + 1;
  std::vector<std::uint8_t> raw(stride * img.height());
  for (std::uint32_t y = 0; y < img.height(); ++y) {
    raw[y * stride] = 0; // no per-row filtering
    std::memcpy(&raw[y * stride + 1], &img(0, y), img.width());
  }
  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_size);
  if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK)
    throw io_error("PNG compression failed");
  comp.resize(comp_size);
  put_chunk("IDAT", comp);
  put_chunk("IEND", {});
  return out;
}

inline void write_png(const Grid<std::uint8_t>& img, const std::string& path) {
  const auto bytes = encode_png(img);
  detail::write_file(path, bytes.data(), bytes.size());
}

/// Read either supported format, picking the codec from the leading bytes.
inline Grid<std::uint8_t> read_image(const std::string& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= 8 &&
      std::equal(detail::png_signature.begin(), detail::png_signature.end(),
                 bytes.begin()))
    return decode_png(bytes, path);
  return decode_pgm(bytes, path);
}

} // namespace ghostkit::io

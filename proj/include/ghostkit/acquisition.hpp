#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ghostkit/errors.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/parallel.hpp"
#include "ghostkit/scene.hpp"
#include "ghostkit/speckle.hpp"

namespace ghostkit {

/// Per-exposure scalars of the dual-arm measurement.
struct FrameRecord {
  std::uint64_t m = 0;
  double S = 0.0; ///< bucket signal, sum of I(x)*T(x)
  double R = 0.0; ///< reference total, sum of I(x)
  double T = 0.0; ///< instantaneous transmission S/R

  bool operator==(const FrameRecord&) const = default;
};

/// Bucket detector: total intensity behind the object. Accumulated in
/// binary64, row-major — the fixed order that makes results reproducible.
inline double bucket_signal(const IntensityFrame& frame, const TransmissionMask& mask) {
  require_same_shape(frame.data, mask.data, "bucket_signal");
  double s = 0.0;
  const std::size_t n = frame.data.size();
  for (std::size_t i = 0; i < n; ++i)
    s += static_cast<double>(frame.data[i]) * mask.data[i];
  return s;
}

/// Reference arm total over the same pixel region as bucket_signal.
inline double reference_total(const IntensityFrame& frame) {
  double r = 0.0;
  for (float v : frame.data)
    r += static_cast<double>(v);
  if (!(r > 0.0))
    throw degenerate_frame_error("frame " + std::to_string(frame.index) +
                                 " integrates to zero");
  return r;
}

namespace detail {

inline void apply_detector_noise(IntensityFrame& frame, const SourceConfig& config,
                                 double sigma_frac) {
  const float sigma = static_cast<float>(sigma_frac * config.mean_intensity);
  const std::size_t n = frame.data.size();
  for (std::size_t p = 0; p < n; ++p) {
    rng::PixelStream st(config.master_seed, frame.index, static_cast<std::uint32_t>(p),
                        rng::Stream::noise);
    frame.data[p] = std::max(0.0f, frame.data[p] + sigma * st.normal());
  }
}

} // namespace detail

/// Frame synthesis as the detector sees it: speckle plus optional additive
/// Gaussian readout noise (clamped at zero), fully determined by
/// (config, m, sigma_frac).
inline IntensityFrame detected_frame(const SourceConfig& config, std::uint64_t m,
                                     double noise_sigma_frac = 0.0) {
  IntensityFrame frame = generate_frame(config, m);
  if (noise_sigma_frac > 0.0)
    detail::apply_detector_noise(frame, config, noise_sigma_frac);
  return frame;
}

/// One experiment: config echo, mask, ordered per-frame scalars, and a
/// policy for getting at the reference frames again (regeneration, an
/// in-memory cache, or a store file; scalar-only runs have none).
struct AcquisitionRun {
  enum class FrameAccess { none, regenerate, cached, store_file };

  SourceConfig config;
  std::optional<TransmissionMask> mask;
  double noise_sigma_frac = 0.0;
  std::vector<FrameRecord> records;

  FrameAccess frame_access = FrameAccess::none;
  std::vector<Grid<float>> cache;
  std::string store_path;

  std::uint64_t frame_count() const { return records.size(); }

  void require_frames(std::uint64_t limit) const {
    if (limit > records.size())
      throw insufficient_frames_error("requested " + std::to_string(limit) +
                                      " frames, run has " +
                                      std::to_string(records.size()));
    if (frame_access == FrameAccess::none)
      throw missing_frames_error("run carries scalars only, reference frames "
                                 "are not available");
  }

  /// Bytes per store record (scalars plus one frame when present).
  std::uint64_t store_record_stride() const {
    return 32 + 4ull * config.width * config.height;
  }

  Grid<float> frame(std::uint64_t m) const {
    require_frames(m + 1);
    switch (frame_access) {
    case FrameAccess::cached:
      return cache[m];
    case FrameAccess::regenerate:
      return detected_frame(config, m, noise_sigma_frac).data;
    case FrameAccess::store_file: {
      std::ifstream in(store_path, std::ios::binary);
      if (!in)
        throw io_error("cannot open store: " + store_path);
      Grid<float> g(config.width, config.height);
      in.seekg(static_cast<std::streamoff>(48 + m * store_record_stride() + 32));
      in.read(reinterpret_cast<char*>(g.data()),
              static_cast<std::streamsize>(g.size() * 4));
      if (!in)
        throw corruption_error("store truncated reading frame " + std::to_string(m),
                               48 + m * store_record_stride() + 32);
      return g;
    }
    default:
      throw missing_frames_error("run carries no frames");
    }
  }

  /// Visit frames [first, first+count) in ascending order. For regenerated
  /// frames, synthesis may run on several workers; visitation order (and so
  /// every accumulation built on it) is the same for any worker count.
  template <typename Fn>
  void visit_frames(std::uint64_t first, std::uint64_t count, Fn&& fn,
                    int threads = 1) const {
    require_frames(first + count);
    switch (frame_access) {
    case FrameAccess::cached:
      for (std::uint64_t m = first; m < first + count; ++m)
        fn(m, cache[m]);
      return;
    case FrameAccess::regenerate:
      par::ordered_generate<IntensityFrame>(
          first, count, threads,
          [this](std::uint64_t m) {
            return detected_frame(config, m, noise_sigma_frac);
          },
          [&fn](std::uint64_t m, IntensityFrame&& f) { fn(m, f.data); });
      return;
    case FrameAccess::store_file: {
      std::ifstream in(store_path, std::ios::binary);
      if (!in)
        throw io_error("cannot open store: " + store_path);
      const std::uint64_t stride = store_record_stride();
      in.seekg(static_cast<std::streamoff>(48 + first * stride + 32));
      Grid<float> g(config.width, config.height);
      for (std::uint64_t m = first; m < first + count; ++m) {
        in.read(reinterpret_cast<char*>(g.data()),
                static_cast<std::streamsize>(g.size() * 4));
        if (!in)
          throw corruption_error("store truncated reading frame " +
                                     std::to_string(m),
                                 48 + m * stride + 32);
        fn(m, g);
        in.seekg(32, std::ios::cur); // skip the next record's scalars
      }
      return;
    }
    default:
      throw missing_frames_error("run carries no frames");
    }
  }

  /// Visit the frames at the given ascending indices, in that order.
  template <typename Fn>
  void visit_frames_at(const std::vector<std::uint64_t>& indices, Fn&& fn,
                       int threads = 1) const {
    if (indices.empty())
      return;
    require_frames(indices.back() + 1);
    switch (frame_access) {
    case FrameAccess::cached:
      for (std::uint64_t m : indices)
        fn(m, cache[m]);
      return;
    case FrameAccess::regenerate:
      par::ordered_generate<IntensityFrame>(
          0, indices.size(), threads,
          [&](std::uint64_t i) {
            return detected_frame(config, indices[i], noise_sigma_frac);
          },
          [&](std::uint64_t i, IntensityFrame&& f) { fn(indices[i], f.data); });
      return;
    case FrameAccess::store_file: {
      std::ifstream in(store_path, std::ios::binary);
      if (!in)
        throw io_error("cannot open store: " + store_path);
      const std::uint64_t stride = store_record_stride();
      Grid<float> g(config.width, config.height);
      for (std::uint64_t m : indices) {
        in.seekg(static_cast<std::streamoff>(48 + m * stride + 32));
        in.read(reinterpret_cast<char*>(g.data()),
                static_cast<std::streamsize>(g.size() * 4));
        if (!in)
          throw corruption_error("store truncated reading frame " +
                                     std::to_string(m),
                                 48 + m * stride + 32);
        fn(m, g);
      }
      return;
    }
    default:
      throw missing_frames_error("run carries no frames");
    }
  }
};

struct AcquisitionOptions {
  double noise_sigma_frac = 0.0;
  bool keep_frames = false; ///< cache frames in memory instead of regenerating
  int threads = 1;
};

/// Run the virtual experiment: M exposures, each yielding (S, R, T) and a
/// shared reference frame. Deterministic given (config, mask, M, options).
inline AcquisitionRun run_acquisition(const SourceConfig& config,
                                      const TransmissionMask& mask, std::uint64_t M,
                                      const AcquisitionOptions& options = {}) {
  config.validate();
  mask.validate();
  if (M < 1)
    throw precondition_error("acquisition needs at least one frame");
  if (mask.data.width() != config.width || mask.data.height() != config.height)
    throw shape_error("mask is " + std::to_string(mask.data.width()) + "x" +
                      std::to_string(mask.data.height()) + ", frames are " +
                      std::to_string(config.width) + "x" +
                      std::to_string(config.height));

  AcquisitionRun run;
  run.config = config;
  run.mask = mask;
  run.noise_sigma_frac = options.noise_sigma_frac;
  run.records.reserve(M);
  if (options.keep_frames)
    run.cache.reserve(M);

  par::ordered_generate<IntensityFrame>(
      0, M, options.threads,
      [&](std::uint64_t m) { return detected_frame(config, m, options.noise_sigma_frac); },
      [&](std::uint64_t m, IntensityFrame&& frame) {
        const double R = reference_total(frame); // throws if degenerate
        const double S = bucket_signal(frame, mask);
        run.records.push_back({m, S, R, S / R});
        if (options.keep_frames)
          run.cache.push_back(std::move(frame.data));
      });

  run.frame_access = options.keep_frames ? AcquisitionRun::FrameAccess::cached
                                         : AcquisitionRun::FrameAccess::regenerate;
  return run;
}

// ----------------------------------------------------------------- store I/O
//
// Little-endian layout. Header (48 bytes): magic "GIFS", version u16 = 1,
// flags u16 (bit 0: frames present), width u32, height u32, M u64,
// master_seed u64, speckle_radius f64, mean_intensity f64. Then M records:
// m u64, S f64, R f64, T f64 [, width*height f32 intensities].

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}
inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class StoreReader {
public:
  StoreReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_)
      throw io_error("cannot open store: " + path);
  }

  std::uint64_t offset() const { return offset_; }

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw corruption_error(path_ + ": store truncated", offset_);
    offset_ += n;
  }

  void skip(std::uint64_t n) {
    in_.seekg(static_cast<std::streamoff>(n), std::ios::cur);
    offset_ += n;
    if (!in_)
      throw corruption_error(path_ + ": store truncated", offset_);
  }

  std::uint16_t u16() {
    std::uint8_t b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (std::uint16_t(b[1]) << 8));
  }
  std::uint32_t u32() {
    std::uint8_t b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    std::uint8_t b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | b[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

  std::uint64_t file_size() {
    in_.clear();
    in_.seekg(0, std::ios::end);
    return static_cast<std::uint64_t>(in_.tellg());
  }

private:
  std::string path_;
  std::ifstream in_;
  std::uint64_t offset_ = 0;
};

} // namespace detail

inline void save_store(const AcquisitionRun& run, const std::string& path,
                       std::optional<bool> include_frames = std::nullopt) {
  if (run.records.empty())
    throw precondition_error("refusing to save an empty run");
  const bool frames =
      include_frames.value_or(run.frame_access != AcquisitionRun::FrameAccess::none);
  if (frames && run.frame_access == AcquisitionRun::FrameAccess::none)
    throw missing_frames_error("run has no frames to store");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot open for writing: " + path);

  std::vector<std::uint8_t> buf;
  buf.reserve(64);
  const char magic[4] = {'G', 'I', 'F', 'S'};
  buf.insert(buf.end(), magic, magic + 4);
  detail::put_u16(buf, 1);
  detail::put_u16(buf, frames ? 1 : 0);
  detail::put_u32(buf, run.config.width);
  detail::put_u32(buf, run.config.height);
  detail::put_u64(buf, run.records.size());
  detail::put_u64(buf, run.config.master_seed);
  detail::put_f64(buf, run.config.speckle_radius);
  detail::put_f64(buf, run.config.mean_intensity);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));

  auto write_scalars = [&](const FrameRecord& rec) {
    buf.clear();
    detail::put_u64(buf, rec.m);
    detail::put_f64(buf, rec.S);
    detail::put_f64(buf, rec.R);
    detail::put_f64(buf, rec.T);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  };

  if (!frames) {
    for (const auto& rec : run.records)
      write_scalars(rec);
  } else {
    std::vector<std::uint8_t> fbuf;
    run.visit_frames(0, run.records.size(), [&](std::uint64_t m, const Grid<float>& g) {
      write_scalars(run.records[m]);
      fbuf.clear();
      fbuf.reserve(g.size() * 4);
      for (float v : g)
        detail::put_f32(fbuf, v);
      out.write(reinterpret_cast<const char*>(fbuf.data()),
                static_cast<std::streamsize>(fbuf.size()));
    });
  }
  if (!out)
    throw io_error("write failed: " + path);
}

inline AcquisitionRun load_store(const std::string& path) {
  detail::StoreReader in(path);

  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "GIFS", 4) != 0)
    throw format_error(path + ": not a frame store (bad magic)");
  const std::uint16_t version = in.u16();
  if (version != 1)
    throw format_error(path + ": unsupported store version " +
                       std::to_string(version));
  const std::uint16_t flags = in.u16();
  if (flags > 1)
    throw format_error(path + ": unknown store flags");
  const bool frames = flags & 1;

  AcquisitionRun run;
  run.config.width = in.u32();
  run.config.height = in.u32();
  const std::uint64_t M = in.u64();
  run.config.master_seed = in.u64();
  run.config.speckle_radius = in.f64();
  run.config.mean_intensity = in.f64();
  if (run.config.width == 0 || run.config.height == 0)
    throw format_error(path + ": zero store dimensions");
  if (M == 0)
    throw format_error(path + ": store holds no records");

  const std::uint64_t frame_bytes =
      frames ? 4ull * run.config.width * run.config.height : 0;
  run.records.reserve(M);
  for (std::uint64_t i = 0; i < M; ++i) {
    FrameRecord rec;
    const std::uint64_t rec_offset = in.offset();
    rec.m = in.u64();
    rec.S = in.f64();
    rec.R = in.f64();
    rec.T = in.f64();
    if (rec.m != i)
      throw corruption_error(path + ": record " + std::to_string(i) +
                                 " has frame index " + std::to_string(rec.m),
                             rec_offset);
    if (!(rec.R > 0.0))
      throw corruption_error(path + ": record " + std::to_string(i) +
                                 " has non-positive reference total",
                             rec_offset);
    if (rec.T != rec.S / rec.R)
      throw corruption_error(path + ": record " + std::to_string(i) +
                                 " transmission does not equal S/R",
                             rec_offset);
    run.records.push_back(rec);
    if (frames)
      in.skip(frame_bytes);
  }
  const std::uint64_t end = in.file_size();
  if (end < in.offset())
    throw corruption_error(path + ": store truncated", end);
  if (end > in.offset())
    throw corruption_error(path + ": trailing bytes after last record", in.offset());

  run.frame_access = frames ? AcquisitionRun::FrameAccess::store_file
                            : AcquisitionRun::FrameAccess::none;
  run.store_path = path;
  return run;
}

} // namespace ghostkit

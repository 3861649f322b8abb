#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace ghostkit::rng {

/// One block of the philox-4x32 counter permutation, 10 rounds.
/// Pure function of (counter, key); this is what makes every sample in the
/// library addressable: same inputs, same bits, on any platform.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t mul0 = 0xD2511F53u;
  constexpr std::uint32_t mul1 = 0xCD9E8D57u;
  constexpr std::uint32_t weyl0 = 0x9E3779B9u;
  constexpr std::uint32_t weyl1 = 0xBB67AE85u;

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(mul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(mul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key = {key[0] + weyl0, key[1] + weyl1};
  }
  return ctr;
}

/// Independent sub-streams drawn from one master seed.
enum class Stream : std::uint32_t {
  field = 0, ///< complex source field samples
  noise = 1, ///< additive detector noise
};

namespace detail {

struct ZigguratTables {
  std::uint32_t kn[128];
  float wn[128];
  float fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;
    double dn = 3.442619855899;
    const double tn0 = dn;
    const double vn = 9.91256303526217e-3;

    double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = static_cast<float>(q / m1);
    wn[127] = static_cast<float>(dn / m1);
    fn[0] = 1.0f;
    fn[127] = static_cast<float>(std::exp(-0.5 * dn * dn));

    double tn = tn0;
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = static_cast<float>(std::exp(-0.5 * dn * dn));
      wn[i] = static_cast<float>(dn / m1);
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

} // namespace detail

/// Counter-based random stream for one pixel of one frame. Consuming a
/// variable number of draws here never shifts any other pixel's stream,
/// so frames are reproducible in any generation order.
class PixelStream {
public:
  PixelStream(std::uint64_t seed, std::uint64_t frame, std::uint32_t pixel, Stream stream)
      : ctr_{pixel,
             static_cast<std::uint32_t>(stream) << 24,
             static_cast<std::uint32_t>(frame),
             static_cast<std::uint32_t>(frame >> 32)},
        key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        pos_(4) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = philox4x32_10(ctr_, key_);
      ++ctr_[1]; // next block of this pixel's stream
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on (0,1) with 24 random bits.
  float uniform01() {
    return (static_cast<float>(next_u32() >> 8) + 0.5f) * 0x1p-24f;
  }

  /// Standard normal via the 128-layer ziggurat.
  float normal() {
    const auto& z = detail::ziggurat();
    for (;;) {
      const std::int32_t hz = static_cast<std::int32_t>(next_u32());
      const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
      if (static_cast<std::uint64_t>(std::llabs(hz)) < z.kn[iz])
        return static_cast<float>(hz) * z.wn[iz];

      if (iz == 0) {
        // Tail beyond the base layer: exact exponential rejection.
        float x, y;
        do {
          x = -std::log(uniform01()) * 0.2904764f; // 1 / base layer edge
          y = -std::log(uniform01());
        } while (y + y < x * x);
        return hz > 0 ? 3.442620f + x : -3.442620f - x;
      }

      const float x = static_cast<float>(hz) * z.wn[iz];
      if (z.fn[iz] + uniform01() * (z.fn[iz - 1] - z.fn[iz]) <
          std::exp(-0.5f * x * x))
        return x;
    }
  }

private:
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_;
};

} // namespace ghostkit::rng

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "ghostkit/errors.hpp"
#include "ghostkit/fft.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/parallel.hpp"
#include "ghostkit/rng.hpp"

using namespace ghostkit;
using namespace ghostkit::rng;
using ghostkit::fft::Fft2D;

TEST_CASE("grid is row-major and bounds its constructor") {
  Grid<int> g(3, 2);
  REQUIRE(g.width() == 3);
  REQUIRE(g.height() == 2);
  REQUIRE(g.size() == 6);
  g(0, 0) = 1;
  g(2, 0) = 7;
  g(0, 1) = 9;
  CHECK(g[0] == 1);
  CHECK(g[2] == 7);
  CHECK(g[3] == 9);

  g.fill(5);
  for (int v : g)
    CHECK(v == 5);

  Grid<int> h(3, 2);
  h.fill(5);
  CHECK(g == h);
  h(1, 1) = 4;
  CHECK_FALSE(g == h);

  CHECK_THROWS_AS(Grid<int>(0, 4), precondition_error);
  CHECK_THROWS_AS(Grid<int>(4, 0), precondition_error);
}

TEST_CASE("shape checks name the mismatched operands") {
  Grid<float> a(4, 4), b(4, 5);
  CHECK(a.same_shape(a));
  CHECK_FALSE(a.same_shape(b));
  CHECK_THROWS_AS(require_same_shape(a, b, "blend"), shape_error);
  try {
    require_same_shape(a, b, "blend");
  } catch (const shape_error& e) {
    CHECK(std::string(e.what()).find("blend") != std::string::npos);
  }
}

TEST_CASE("grid_cast converts element type") {
  Grid<double> g(2, 2);
  g[0] = 0.5;
  g[1] = 1.5;
  g[2] = -2.0;
  g[3] = 3.0;
  Grid<float> f = grid_cast<float>(g);
  CHECK(f[0] == 0.5f);
  CHECK(f[2] == -2.0f);
}

TEST_CASE("corruption errors carry the byte offset") {
  corruption_error e("bad record", 192);
  CHECK(e.offset() == 192);
  CHECK(std::string(e.what()).find("192") != std::string::npos);
}

// Reference outputs for the counter cipher, cross-checked against an
// independent implementation. Any change to the round function, the
// multipliers, or the key schedule trips these.
TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;

  CHECK(philox4x32_10(A4{0u, 0u, 0u, 0u}, A2{0u, 0u}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

  CHECK(philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

  CHECK(philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});

  CHECK(philox4x32_10(A4{7u, 0u, 0x2au, 0u}, A2{0x7bu, 0x1c8u}) ==
        A4{0xa67aad78u, 0xf3337457u, 0x2fe15114u, 0x93fb1b9du});
}

TEST_CASE("pixel streams are reproducible and decorrelated") {
  PixelStream a(42, 3, 17, Stream::field);
  PixelStream b(42, 3, 17, Stream::field);
  for (int i = 0; i < 100; ++i)
    REQUIRE(a.next_u32() == b.next_u32());

  PixelStream base(42, 3, 17, Stream::field);
  PixelStream other_pixel(42, 3, 18, Stream::field);
  PixelStream other_frame(42, 4, 17, Stream::field);
  PixelStream other_seed(43, 3, 17, Stream::field);
  PixelStream other_stream(42, 3, 17, Stream::noise);
  const std::uint32_t first = base.next_u32();
  CHECK(first != other_pixel.next_u32());
  CHECK(first != other_frame.next_u32());
  CHECK(first != other_seed.next_u32());
  CHECK(first != other_stream.next_u32());
}

TEST_CASE("uniform01 stays strictly inside the unit interval") {
  PixelStream s(9, 0, 0, Stream::field);
  double sum = 0.0;
  float lo = 1.0f, hi = 0.0f;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const float u = s.uniform01();
    REQUIRE(u > 0.0f);
    REQUIRE(u < 1.0f);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(sum / n == Catch::Approx(0.5).margin(0.005));
  CHECK(lo < 0.001f);
  CHECK(hi > 0.999f);
}

TEST_CASE("normal deviates have standard moments") {
  PixelStream s(1, 0, 0, Stream::field);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  int within_one = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sum2 += x * x;
    if (std::abs(x) <= 1.0)
      ++within_one;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == Catch::Approx(0.0).margin(0.01));
  CHECK(var == Catch::Approx(1.0).margin(0.02));
  // P(|X| <= 1) = 0.68269 for a standard normal
  CHECK(within_one / double(n) == Catch::Approx(0.68269).margin(0.008));
}

TEST_CASE("normal tail beyond the ziggurat edge is exercised") {
  // The layered fast path covers |x| < 3.442620; draws past that edge
  // take the fallback branch. With 2e5 draws, expect ~115 of them.
  PixelStream s(77, 0, 0, Stream::field);
  int tail = 0;
  for (int i = 0; i < 200000; ++i)
    if (std::abs(s.normal()) > 3.442620f)
      ++tail;
  CHECK(tail > 40);
  CHECK(tail < 250);
}

namespace {

// O(N^2) reference transform, double accumulation.
std::vector<std::complex<double>>
naive_dft(const std::vector<std::complex<float>>& in, std::uint32_t w,
          std::uint32_t h, int sign) {
  const double pi = 3.14159265358979323846;
  std::vector<std::complex<double>> out(in.size());
  for (std::uint32_t ky = 0; ky < h; ++ky)
    for (std::uint32_t kx = 0; kx < w; ++kx) {
      std::complex<double> acc{0.0, 0.0};
      for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
          const double phase = sign * 2.0 * pi *
                               (double(kx) * x / w + double(ky) * y / h);
          acc += std::complex<double>(in[y * w + x]) *
                 std::polar(1.0, phase);
        }
      out[ky * w + kx] = acc;
    }
  return out;
}

std::vector<std::complex<float>> random_field(std::uint32_t w, std::uint32_t h,
                                              std::uint64_t seed) {
  std::vector<std::complex<float>> v(std::size_t(w) * h);
  for (std::uint32_t p = 0; p < v.size(); ++p) {
    PixelStream s(seed, 0, p, Stream::field);
    v[p] = {s.uniform01() - 0.5f, s.uniform01() - 0.5f};
  }
  return v;
}

} // namespace

TEST_CASE("fft matches a naive dft, including non-power-of-two sizes") {
  struct Case {
    std::uint32_t w, h;
  };
  for (const Case c : {Case{4, 4}, Case{8, 8}, Case{6, 5}}) {
    const auto input = random_field(c.w, c.h, 11 * c.w + c.h);
    Fft2D& fft = Fft2D::thread_cached(c.w, c.h);
    std::copy(input.begin(), input.end(), fft.buffer());
    fft.forward();

    const auto want = naive_dft(input, c.w, c.h, -1);
    for (std::size_t i = 0; i < input.size(); ++i) {
      CHECK(double(fft.buffer()[i].real()) ==
            Catch::Approx(want[i].real()).margin(1e-4));
      CHECK(double(fft.buffer()[i].imag()) ==
            Catch::Approx(want[i].imag()).margin(1e-4));
    }
  }
}

TEST_CASE("round trip scales by the element count") {
  const std::uint32_t w = 8, h = 6;
  const auto input = random_field(w, h, 99);
  Fft2D& fft = Fft2D::thread_cached(w, h);
  std::copy(input.begin(), input.end(), fft.buffer());
  fft.forward();
  fft.inverse();
  const double n = double(w) * h;
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(double(fft.buffer()[i].real()) ==
          Catch::Approx(n * input[i].real()).margin(1e-3));
    CHECK(double(fft.buffer()[i].imag()) ==
          Catch::Approx(n * input[i].imag()).margin(1e-3));
  }
}

TEST_CASE("ordered_generate keeps consume order and is thread-count invariant") {
  auto run_with = [](int threads) {
    std::vector<int> order;
    par::ordered_generate<int>(
        10, 500, threads, [](std::uint64_t i) { return int(i) * 3; },
        [&](std::uint64_t i, int v) {
          REQUIRE(v == int(i) * 3);
          order.push_back(int(i));
        });
    return order;
  };
  const auto seq = run_with(1);
  REQUIRE(seq.size() == 500);
  for (std::size_t i = 0; i < seq.size(); ++i)
    REQUIRE(seq[i] == int(10 + i));
  CHECK(run_with(3) == seq);
  CHECK(run_with(8) == seq);
}

TEST_CASE("worker exceptions surface on the calling thread") {
  CHECK_THROWS_AS(par::ordered_generate<int>(
                      0, 1000, 4,
                      [](std::uint64_t i) -> int {
                        if (i == 500)
                          throw io_error("boom");
                        return int(i);
                      },
                      [](std::uint64_t, int) {}),
                  io_error);
}

TEST_CASE("thread count comes from the environment") {
  unsetenv("GHOSTKIT_THREADS");
  CHECK(par::threads_from_env() == 1);
  setenv("GHOSTKIT_THREADS", "4", 1);
  CHECK(par::threads_from_env() == 4);
  setenv("GHOSTKIT_THREADS", "0", 1);
  CHECK(par::threads_from_env() == 1);
  setenv("GHOSTKIT_THREADS", "junk", 1);
  CHECK(par::threads_from_env() == 1);
  setenv("GHOSTKIT_THREADS", "9999", 1);
  CHECK(par::threads_from_env() == 256);
  unsetenv("GHOSTKIT_THREADS");
}

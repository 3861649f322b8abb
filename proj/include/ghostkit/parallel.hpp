#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ghostkit::par {

/// Worker count from GHOSTKIT_THREADS, else 1. Values are clamped to [1, 256].
inline int threads_from_env() {
  const char* env = std::getenv("GHOSTKIT_THREADS");
  if (!env || !*env)
    return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    return 1;
  return static_cast<int>(v > 256 ? 256 : v);
}

/// Produce items for indices [first, first+count) with gen(i) on `threads`
/// workers, then hand them to consume(i, item) strictly in ascending order.
/// The consumption order — and therefore every downstream accumulation —
/// is identical for any worker count.
template <typename T, typename Gen, typename Consume>
void ordered_generate(std::uint64_t first, std::uint64_t count, int threads,
                      Gen&& gen, Consume&& consume) {
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i)
      consume(first + i, gen(first + i));
    return;
  }

  const std::uint64_t block = static_cast<std::uint64_t>(threads) * 32;
  std::vector<T> buffer(static_cast<std::size_t>(block));

  for (std::uint64_t base = 0; base < count; base += block) {
    const std::uint64_t n = std::min(block, count - base);
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t]() {
        try {
          for (std::uint64_t i = static_cast<std::uint64_t>(t); i < n;
               i += static_cast<std::uint64_t>(threads))
            buffer[static_cast<std::size_t>(i)] = gen(first + base + i);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers)
      w.join();
    for (auto& e : errors)
      if (e)
        std::rethrow_exception(e);
    for (std::uint64_t i = 0; i < n; ++i)
      consume(first + base + i, std::move(buffer[static_cast<std::size_t>(i)]));
  }
}

} // namespace ghostkit::par

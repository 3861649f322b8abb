#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ghostkit/errors.hpp"

namespace ghostkit {

/// Dense row-major 2-D array. Row-major order is part of the contract:
/// every accumulation in the library walks grids in this order, which is
/// what makes independently computed sums bit-for-bit reproducible.
template <typename T>
class Grid {
public:
  using value_type = T;

  Grid() = default;
  Grid(std::uint32_t width, std::uint32_t height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {
    if (width == 0 || height == 0)
      throw precondition_error("grid dimensions must be positive");
  }

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::uint32_t x, std::uint32_t y) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(std::uint32_t x, std::uint32_t y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<T> data_;
};

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (!a.same_shape(b))
    throw shape_error(std::string(what) + ": grid shapes differ (" +
                      std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                      " vs " + std::to_string(b.width()) + "x" +
                      std::to_string(b.height()) + ")");
}

/// Convert element type; used at the float-frame / double-image boundary.
template <typename To, typename From>
Grid<To> grid_cast(const Grid<From>& g) {
  Grid<To> out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i)
    out[i] = static_cast<To>(g[i]);
  return out;
}

} // namespace ghostkit

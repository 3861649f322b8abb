#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ghostkit {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value or unparseable config text.
class config_error : public error {
public:
  using error::error;
};

/// An operation was called with arguments that violate its preconditions.
class precondition_error : public error {
public:
  using error::error;
};

/// File could not be opened, read, or written.
class io_error : public error {
public:
  using error::error;
};

/// Bytes do not look like the expected file format at all.
class format_error : public error {
public:
  using error::error;
};

/// File has the right shape but its content is truncated or inconsistent.
class corruption_error : public error {
public:
  corruption_error(const std::string& what, std::uint64_t offset)
      : error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit corruption_error(const std::string& what) : error(what), offset_(0) {}

  std::uint64_t offset() const { return offset_; }

private:
  std::uint64_t offset_;
};

/// Two grids that must agree in width/height do not.
class shape_error : public error {
public:
  using error::error;
};

/// Per-frame data was requested from a run that only carries scalars.
class missing_frames_error : public error {
public:
  using error::error;
};

/// More frames were requested than the run provides.
class insufficient_frames_error : public error {
public:
  using error::error;
};

/// A threshold partition left one register with no members.
class empty_register_error : public error {
public:
  using error::error;
};

/// Too few samples to compute the requested statistic.
class insufficient_data_error : public error {
public:
  using error::error;
};

/// A frame integrated to zero, so its transmission estimate is undefined.
class degenerate_frame_error : public error {
public:
  using error::error;
};

/// An image transform cannot proceed (constant input, single occupied bin, ...).
class degenerate_image_error : public error {
public:
  using error::error;
};

} // namespace ghostkit

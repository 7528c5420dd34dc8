#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lopc {

enum class errc {
  invalid_shape,
  invalid_bound,
  non_finite,
  zero_range,
  bin_overflow,
  bound_violation,
  shape_mismatch,
  bad_magic,
  version_unsupported,
  corrupt_stream,
  length_mismatch,
  spec_mismatch,
  io_error,
};

constexpr std::string_view to_string(errc code)
{
  switch (code) {
    case errc::invalid_shape: return "InvalidShape";
    case errc::invalid_bound: return "InvalidBound";
    case errc::non_finite: return "NonFinite";
    case errc::zero_range: return "ZeroRange";
    case errc::bin_overflow: return "BinOverflow";
    case errc::bound_violation: return "BoundViolation";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::bad_magic: return "BadMagic";
    case errc::version_unsupported: return "VersionUnsupported";
    case errc::corrupt_stream: return "CorruptStream";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::spec_mismatch: return "SpecMismatch";
    case errc::io_error: return "IOError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Raised by verify_encode; records the first offending vertex.
class bound_violation : public error {
 public:
  bound_violation(std::size_t index, const std::string& what)
      : error(errc::bound_violation, what), index_(index)
  {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace lopc

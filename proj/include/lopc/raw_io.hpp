#pragma once

// Headerless little-endian volumes in the SDRBench layout (x fastest).

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

#include "container_codec.hpp"
#include "error.hpp"
#include "scalar_field.hpp"

namespace lopc {

struct RawVolumeSpec {
  std::filesystem::path path;
  DataType dtype = DataType::f32;
  GridShape shape;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw error(errc::io_error, "cannot read " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(errc::io_error, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw error(errc::io_error, "cannot write " + path.string());
}

namespace detail {

template <field_value T>
ScalarField<T> field_from_le(const GridShape& shape, std::span<const std::uint8_t> raw)
{
  using bits = typename code_traits<T>::bits_type;
  ScalarField<T> f(shape);
  for (std::size_t i = 0; i < f.size(); i++) {
    bits u = 0;
    for (std::size_t b = 0; b < sizeof(T); b++) u |= bits(raw[i * sizeof(T) + b]) << (8 * b);
    f.values[i] = std::bit_cast<T>(u);
  }
  return f;
}

template <field_value T>
std::vector<std::uint8_t> field_to_le(const ScalarField<T>& f)
{
  using bits = typename code_traits<T>::bits_type;
  std::vector<std::uint8_t> raw(f.size() * sizeof(T));
  for (std::size_t i = 0; i < f.size(); i++) {
    const bits u = std::bit_cast<bits>(f.values[i]);
    for (std::size_t b = 0; b < sizeof(T); b++) raw[i * sizeof(T) + b] = std::uint8_t(u >> (8 * b));
  }
  return raw;
}

}  // namespace detail

inline AnyField read_raw(const RawVolumeSpec& spec)
{
  const auto raw = read_file(spec.path);
  const std::size_t expected = spec.shape.size() * static_cast<std::size_t>(element_size(spec.dtype));
  if (raw.size() != expected) {
    throw error(errc::spec_mismatch, spec.path.string() + " holds " + std::to_string(raw.size()) +
                                         " bytes, dims and type require " +
                                         std::to_string(expected));
  }
  if (spec.dtype == DataType::f32) return detail::field_from_le<float>(spec.shape, raw);
  return detail::field_from_le<double>(spec.shape, raw);
}

inline std::vector<std::uint8_t> field_bytes(const AnyField& field)
{
  return std::visit([](const auto& f) { return detail::field_to_le(f); }, field);
}

inline void write_raw(const std::filesystem::path& path, const AnyField& field)
{
  write_file(path, field_bytes(field));
}

}  // namespace lopc

#pragma once

// End-to-end compressor and the archive format.
//
// Archive layout, little-endian, IEEE-754:
//   "LOPC"            4 bytes
//   version           u16 (= 1)
//   dtype             u8  (0 = f32, 1 = f64)
//   rank              u8
//   dims              u64 x rank
//   eb_mode           u8  (0 = ABS, 1 = NOA)
//   eb_user           f64
//   eps_abs           f64  resolved bound; the decoder uses only this
//   data_range        f64
//   reserved          8 bytes of zero
//   bin stream        u64 length + chunked stream
//   subbin stream     u64 length + chunked stream

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "grid_mesh.hpp"
#include "lossless_stages.hpp"
#include "order_fixpoint.hpp"
#include "quantizer.hpp"
#include "scalar_field.hpp"

namespace lopc {

inline constexpr std::array<char, 4> archive_magic{'L', 'O', 'P', 'C'};
inline constexpr std::uint16_t archive_version = 1;

enum class DataType : std::uint8_t { f32 = 0, f64 = 1 };

template <field_value T>
constexpr DataType data_type_of() noexcept
{
  return std::is_same_v<T, float> ? DataType::f32 : DataType::f64;
}

constexpr int element_size(DataType t) noexcept { return t == DataType::f32 ? 4 : 8; }

struct ArchiveHeader {
  DataType dtype = DataType::f32;
  GridShape shape;
  BoundMode eb_mode = BoundMode::abs;
  double eb_user = 0.0;
  double eps_abs = 0.0;
  double data_range = 0.0;
};

struct CompressedArchive {
  ArchiveHeader header;
  lossless::bytes bin_stream;
  lossless::bytes subbin_stream;

  lossless::bytes serialize() const;
  static CompressedArchive parse(std::span<const std::uint8_t> in);
};

struct CompressStats {
  std::size_t fixpoint_iterations = 0;
  std::size_t fixpoint_raises = 0;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  lossless::bytes take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n)
  {
    for (int b = 0; b < n; b++) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  lossless::bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::span<const std::uint8_t> raw(std::size_t n)
  {
    need(n);
    auto s = in_.subspan(at_, n);
    at_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - at_; }

 private:
  void need(std::size_t n) const
  {
    if (n > in_.size() - at_) throw error(errc::corrupt_stream, "archive is truncated");
  }
  std::uint64_t get(int n)
  {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int b = 0; b < n; b++) v |= std::uint64_t(in_[at_ + b]) << (8 * b);
    at_ += n;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t at_ = 0;
};

template <typename Int>
lossless::bytes words_to_bytes(std::span<const Int> words)
{
  using U = std::make_unsigned_t<Int>;
  lossless::bytes out(words.size() * sizeof(Int));
  for (std::size_t i = 0; i < words.size(); i++) {
    const U u = static_cast<U>(words[i]);
    for (std::size_t b = 0; b < sizeof(Int); b++) {
      out[i * sizeof(Int) + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
  }
  return out;
}

template <typename Int>
std::vector<Int> bytes_to_words(std::span<const std::uint8_t> in)
{
  using U = std::make_unsigned_t<Int>;
  std::vector<Int> out(in.size() / sizeof(Int));
  for (std::size_t i = 0; i < out.size(); i++) {
    U u = 0;
    for (std::size_t b = 0; b < sizeof(Int); b++) u |= U(in[i * sizeof(Int) + b]) << (8 * b);
    out[i] = static_cast<Int>(u);
  }
  return out;
}

}  // namespace detail

inline lossless::bytes CompressedArchive::serialize() const
{
  detail::ByteWriter w;
  for (char c : archive_magic) w.u8(static_cast<std::uint8_t>(c));
  w.u16(archive_version);
  w.u8(static_cast<std::uint8_t>(header.dtype));
  w.u8(static_cast<std::uint8_t>(header.shape.rank()));
  for (int a = 0; a < header.shape.rank(); a++) w.u64(header.shape.dim(a));
  w.u8(static_cast<std::uint8_t>(header.eb_mode));
  w.f64(header.eb_user);
  w.f64(header.eps_abs);
  w.f64(header.data_range);
  w.u64(0);
  w.u64(bin_stream.size());
  w.raw(bin_stream);
  w.u64(subbin_stream.size());
  w.raw(subbin_stream);
  return w.take();
}

inline CompressedArchive CompressedArchive::parse(std::span<const std::uint8_t> in)
{
  detail::ByteReader r(in);
  if (in.size() < archive_magic.size()) throw error(errc::bad_magic, "not an archive");
  for (char c : archive_magic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw error(errc::bad_magic, "not an archive");
  }
  const std::uint16_t version = r.u16();
  if (version != archive_version) {
    throw error(errc::version_unsupported, "archive version " + std::to_string(version));
  }
  CompressedArchive a;
  const std::uint8_t dtype = r.u8();
  const std::uint8_t rank = r.u8();
  if (dtype > 1) throw error(errc::corrupt_stream, "unknown data type");
  if (rank != 2 && rank != 3) throw error(errc::corrupt_stream, "unsupported rank");
  std::array<std::size_t, 3> dims{};
  for (int i = 0; i < rank; i++) dims[i] = r.u64();
  try {
    a.header.shape = GridShape(rank, std::span<const std::size_t>(dims.data(), rank));
  } catch (const error& e) {
    throw error(errc::corrupt_stream, e.what());
  }
  a.header.dtype = static_cast<DataType>(dtype);
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw error(errc::corrupt_stream, "unknown error-bound mode");
  a.header.eb_mode = static_cast<BoundMode>(mode);
  a.header.eb_user = r.f64();
  a.header.eps_abs = r.f64();
  a.header.data_range = r.f64();
  if (!(a.header.eps_abs > 0.0) || !std::isfinite(a.header.eps_abs)) {
    throw error(errc::corrupt_stream, "archive error bound is not positive and finite");
  }
  r.u64();  // reserved
  const std::uint64_t bin_len = r.u64();
  const auto bins = r.raw(bin_len);
  a.bin_stream.assign(bins.begin(), bins.end());
  const std::uint64_t sub_len = r.u64();
  const auto subs = r.raw(sub_len);
  a.subbin_stream.assign(subs.begin(), subs.end());
  if (r.remaining() != 0) throw error(errc::corrupt_stream, "trailing bytes after the archive");
  return a;
}

/// Quantize, solve the subbin fixpoint, verify the bound, then pack both
/// streams. The archive bytes depend only on the field and the bound.
template <field_value T>
CompressedArchive compress(const ScalarField<T>& field, const ErrorBound& eb, int threads = 0,
                           CompressStats* stats = nullptr)
{
  const GridShape& shape = field.shape;
  if (shape.size() == 0 || field.size() != shape.size()) {
    throw error(errc::invalid_shape, "cannot compress an empty field");
  }
  const std::span<const T> values(field.values);
  const ResolvedBound rb = resolve(eb, values);

  QuantizedField<T> q;
  q.bins = quantize_field(values, rb.eps_abs, threads);
  const auto flags = compute_flags(values, std::span<const bin_t<T>>(q.bins), shape, threads);
  auto fx = fixpoint_worklist<subbin_t<T>>(flags, shape, threads);
  q.subbins = std::move(fx.subbins);
  verify_encode<T>(values, q.bins, q.subbins, rb.eps_abs, threads);

  if (stats) {
    stats->fixpoint_iterations = fx.iterations;
    stats->fixpoint_raises = fx.raises;
  }

  constexpr int width = sizeof(T);
  CompressedArchive a;
  a.header.dtype = data_type_of<T>();
  a.header.shape = shape;
  a.header.eb_mode = eb.mode;
  a.header.eb_user = eb.value;
  a.header.eps_abs = rb.eps_abs;
  a.header.data_range = rb.range;
  a.bin_stream = lossless::compress_stream(
      detail::words_to_bytes(std::span<const bin_t<T>>(q.bins)), lossless::bin_pipeline(width),
      threads);
  a.subbin_stream = lossless::compress_stream(
      detail::words_to_bytes(std::span<const subbin_t<T>>(q.subbins)),
      lossless::subbin_pipeline(width), threads);
  return a;
}

/// Unpacks the bin and subbin arrays of an archive whose dtype is T.
template <field_value T>
QuantizedField<T> decode_streams(const CompressedArchive& a, int threads = 0)
{
  if (a.header.dtype != data_type_of<T>()) {
    throw error(errc::corrupt_stream, "archive holds a different data type");
  }
  constexpr int width = sizeof(T);
  const std::size_t expected = a.header.shape.size() * width;
  const auto bin_bytes =
      lossless::decompress_stream(a.bin_stream, lossless::bin_pipeline(width), threads);
  const auto sub_bytes =
      lossless::decompress_stream(a.subbin_stream, lossless::subbin_pipeline(width), threads);
  if (bin_bytes.size() != expected || sub_bytes.size() != expected) {
    throw error(errc::length_mismatch, "stream lengths do not match the grid size");
  }
  QuantizedField<T> q;
  q.bins = detail::bytes_to_words<bin_t<T>>(bin_bytes);
  q.subbins = detail::bytes_to_words<subbin_t<T>>(sub_bytes);
  return q;
}

template <field_value T>
ScalarField<T> decompress_as(const CompressedArchive& a, int threads = 0)
{
  const QuantizedField<T> q = decode_streams<T>(a, threads);
  ScalarField<T> out(a.header.shape);
  const double eps = a.header.eps_abs;
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    out.values[i] = decode<T>(q.bins[i], q.subbins[i], eps);
  }
  return out;
}

inline AnyField decompress(const CompressedArchive& a, int threads = 0)
{
  if (a.header.dtype == DataType::f32) return decompress_as<float>(a, threads);
  return decompress_as<double>(a, threads);
}

inline AnyField decompress(std::span<const std::uint8_t> archive, int threads = 0)
{
  return decompress(CompressedArchive::parse(archive), threads);
}

/// Byte fractions (bins, subbins) of the two streams, header excluded.
inline std::pair<double, double> stream_split_stats(const CompressedArchive& a)
{
  const double b = static_cast<double>(a.bin_stream.size());
  const double s = static_cast<double>(a.subbin_stream.size());
  if (b + s == 0.0) return {0.0, 0.0};
  return {b / (b + s), s / (b + s)};
}

}  // namespace lopc

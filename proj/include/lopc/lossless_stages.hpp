#pragma once

// Reversible byte transforms and the chunked stream format built from them.
//
// Stages: DIFF_k (wrapping delta), NB_k (negabinary), BIT_k (bit-plane
// transpose), RZE_k (zero-word elimination with a run-compressed bitmap).
// k is the word width in bytes. A width-k stage zero-pads its input to a
// multiple of k; the chunk directory records the true length.
//
// Stream layout (all integers little-endian):
//   u32 chunk count
//   per chunk: u32 uncompressed length, u32 stored length, u8 flag
//   chunk payloads, in order
// flag 1 = pipeline output, flag 0 = raw bytes (used when the pipeline does
// not shrink the chunk).

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "quantizer.hpp"

namespace lopc::lossless {

using bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t chunk_size = 16384;

enum class StageKind : std::uint8_t { delta, negabinary, bit_shuffle, rze };

struct Stage {
  StageKind kind;
  int width;  // 1, 4 or 8 bytes
};

using Pipeline = std::vector<Stage>;

inline Pipeline bin_pipeline(int width)
{
  return {{StageKind::delta, width}, {StageKind::negabinary, width},
          {StageKind::bit_shuffle, width}, {StageKind::rze, width}, {StageKind::rze, 1}};
}

inline Pipeline subbin_pipeline(int width)
{
  return {{StageKind::bit_shuffle, width}, {StageKind::rze, width}, {StageKind::rze, 1}};
}

namespace detail {

inline std::uint64_t load_word(const std::uint8_t* p, int k) noexcept
{
  std::uint64_t w = 0;
  for (int b = 0; b < k; b++) w |= std::uint64_t(p[b]) << (8 * b);
  return w;
}

inline void store_word(std::uint8_t* p, int k, std::uint64_t w) noexcept
{
  for (int b = 0; b < k; b++) p[b] = static_cast<std::uint8_t>(w >> (8 * b));
}

inline void put_u32(bytes& out, std::uint32_t v)
{
  for (int b = 0; b < 4; b++) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at)
{
  if (at + 4 > in.size()) throw error(errc::corrupt_stream, "truncated length field");
  return static_cast<std::uint32_t>(load_word(in.data() + at, 4));
}

inline std::size_t round_up(std::size_t n, std::size_t k) noexcept { return (n + k - 1) / k * k; }

inline bytes padded(std::span<const std::uint8_t> in, int k)
{
  bytes out(in.begin(), in.end());
  out.resize(round_up(in.size(), static_cast<std::size_t>(k)), 0);
  return out;
}

inline void require_width_multiple(std::span<const std::uint8_t> in, int k)
{
  if (in.size() % static_cast<std::size_t>(k) != 0) {
    throw error(errc::corrupt_stream, "stage input is not a whole number of words");
  }
}

inline std::uint64_t width_mask(int k) noexcept
{
  return k == 8 ? ~std::uint64_t(0) : (std::uint64_t(1) << (8 * k)) - 1;
}

inline bool get_bit(std::span<const std::uint8_t> b, std::size_t i) noexcept
{
  return (b[i >> 3] >> (i & 7)) & 1u;
}

inline void set_bit(std::span<std::uint8_t> b, std::size_t i) noexcept
{
  b[i >> 3] |= std::uint8_t(1u << (i & 7));
}

inline std::size_t popcount_prefix(std::span<const std::uint8_t> b, std::size_t nbits) noexcept
{
  std::size_t c = 0;
  const std::size_t full = nbits / 8;
  for (std::size_t i = 0; i < full; i++) c += static_cast<std::size_t>(std::popcount(b[i]));
  for (std::size_t i = full * 8; i < nbits; i++) c += get_bit(b, i);
  return c;
}

// 8x8 bit matrix transpose: bit (8r + c) <-> bit (8c + r).
constexpr std::uint64_t transpose8(std::uint64_t x) noexcept
{
  std::uint64_t t;
  t = (x ^ (x >> 7)) & 0x00AA00AA00AA00AAull;
  x = x ^ t ^ (t << 7);
  t = (x ^ (x >> 14)) & 0x0000CCCC0000CCCCull;
  x = x ^ t ^ (t << 14);
  t = (x ^ (x >> 28)) & 0x00000000F0F0F0F0ull;
  x = x ^ t ^ (t << 28);
  return x;
}

}  // namespace detail

// ---- word-level transforms -------------------------------------------------

/// out[0] = in[0], out[i] = in[i] - in[i-1], wrapping.
template <typename U>
void delta_encode(std::span<U> words) noexcept
{
  U prev = 0;
  for (U& w : words) {
    const U cur = w;
    w = static_cast<U>(cur - prev);
    prev = cur;
  }
}

template <typename U>
void delta_decode(std::span<U> words) noexcept
{
  U acc = 0;
  for (U& w : words) {
    acc = static_cast<U>(acc + w);
    w = acc;
  }
}

template <typename U>
constexpr U negabinary_mask() noexcept
{
  return static_cast<U>(0xAAAAAAAAAAAAAAAAull);
}

template <typename U>
constexpr U to_negabinary(U v) noexcept
{
  return static_cast<U>(static_cast<U>(v + negabinary_mask<U>()) ^ negabinary_mask<U>());
}

template <typename U>
constexpr U from_negabinary(U u) noexcept
{
  return static_cast<U>(static_cast<U>(u ^ negabinary_mask<U>()) - negabinary_mask<U>());
}

// ---- byte-level stages -----------------------------------------------------

inline bytes delta_encode_bytes(std::span<const std::uint8_t> in, int k)
{
  bytes out = detail::padded(in, k);
  const std::uint64_t m = detail::width_mask(k);
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < out.size(); i += k) {
    const std::uint64_t cur = detail::load_word(&out[i], k);
    detail::store_word(&out[i], k, (cur - prev) & m);
    prev = cur;
  }
  return out;
}

inline bytes delta_decode_bytes(std::span<const std::uint8_t> in, int k)
{
  detail::require_width_multiple(in, k);
  bytes out(in.begin(), in.end());
  const std::uint64_t m = detail::width_mask(k);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < out.size(); i += k) {
    acc = (acc + detail::load_word(&out[i], k)) & m;
    detail::store_word(&out[i], k, acc);
  }
  return out;
}

inline bytes negabinary_encode_bytes(std::span<const std::uint8_t> in, int k)
{
  bytes out = detail::padded(in, k);
  const std::uint64_t m = detail::width_mask(k);
  const std::uint64_t nb = 0xAAAAAAAAAAAAAAAAull & m;
  for (std::size_t i = 0; i < out.size(); i += k) {
    const std::uint64_t v = detail::load_word(&out[i], k);
    detail::store_word(&out[i], k, ((v + nb) & m) ^ nb);
  }
  return out;
}

inline bytes negabinary_decode_bytes(std::span<const std::uint8_t> in, int k)
{
  detail::require_width_multiple(in, k);
  bytes out(in.begin(), in.end());
  const std::uint64_t m = detail::width_mask(k);
  const std::uint64_t nb = 0xAAAAAAAAAAAAAAAAull & m;
  for (std::size_t i = 0; i < out.size(); i += k) {
    const std::uint64_t u = detail::load_word(&out[i], k);
    detail::store_word(&out[i], k, ((u ^ nb) - nb) & m);
  }
  return out;
}

/// Bit j of word i goes to output bit j * w + i (w = word count, bits are
/// numbered LSB first within each byte). Output length equals input length.
inline bytes bit_shuffle_encode(std::span<const std::uint8_t> in, int k)
{
  const bytes src = detail::padded(in, k);
  const std::size_t w = src.size() / k;
  bytes out(src.size(), 0);
  if (w % 8 == 0) {
    const std::size_t plane_bytes = w / 8;
    for (std::size_t g = 0; g < plane_bytes; g++) {
      for (int b = 0; b < k; b++) {
        std::uint64_t x = 0;
        for (int m = 0; m < 8; m++) x |= std::uint64_t(src[(8 * g + m) * k + b]) << (8 * m);
        x = detail::transpose8(x);
        for (int t = 0; t < 8; t++) out[(8 * b + t) * plane_bytes + g] = std::uint8_t(x >> (8 * t));
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < w; i++) {
    for (int j = 0; j < 8 * k; j++) {
      if (detail::get_bit(src, i * 8 * k + j)) detail::set_bit(out, j * w + i);
    }
  }
  return out;
}

inline bytes bit_shuffle_decode(std::span<const std::uint8_t> in, int k)
{
  detail::require_width_multiple(in, k);
  const std::size_t w = in.size() / k;
  bytes out(in.size(), 0);
  if (w % 8 == 0) {
    const std::size_t plane_bytes = w / 8;
    for (std::size_t g = 0; g < plane_bytes; g++) {
      for (int b = 0; b < k; b++) {
        std::uint64_t x = 0;
        for (int t = 0; t < 8; t++) x |= std::uint64_t(in[(8 * b + t) * plane_bytes + g]) << (8 * t);
        x = detail::transpose8(x);
        for (int m = 0; m < 8; m++) out[(8 * g + m) * k + b] = std::uint8_t(x >> (8 * m));
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < w; i++) {
    for (int j = 0; j < 8 * k; j++) {
      if (detail::get_bit(in, j * w + i)) detail::set_bit(out, i * 8 * k + j);
    }
  }
  return out;
}

// Repeated-run elimination for RZE bitmaps. Each level drops width-k words
// equal to their predecessor (the first word's predecessor is 0) and keeps a
// one-bit-per-word mask of the survivors; the mask is the next level's input.
// Levels stop once the input is <= 8 bytes or a level would not shrink it.
//
// Output: u8 depth, the top-level mask, then the kept words of each level
// from the deepest down to level 0. All level lengths follow from the bitmap
// length, so none are stored.

namespace detail {

inline std::size_t rre_next_length(std::size_t len, int k) noexcept
{
  return (round_up(len, k) / k + 7) / 8;
}

}  // namespace detail

inline bytes rre_encode(std::span<const std::uint8_t> bitmap, int k)
{
  std::vector<bytes> kept_levels;
  bytes cur(bitmap.begin(), bitmap.end());
  while (cur.size() > 8 && kept_levels.size() < 255) {
    const bytes src = detail::padded(cur, k);
    const std::size_t words = src.size() / k;
    bytes mask((words + 7) / 8, 0);
    bytes kept;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < words; i++) {
      const std::uint64_t w = detail::load_word(&src[i * k], k);
      if (w != prev) {
        detail::set_bit(mask, i);
        kept.insert(kept.end(), src.begin() + i * k, src.begin() + (i + 1) * k);
      }
      prev = w;
    }
    if (kept.size() + mask.size() >= cur.size()) break;
    kept_levels.push_back(std::move(kept));
    cur = std::move(mask);
  }

  bytes out;
  out.push_back(static_cast<std::uint8_t>(kept_levels.size()));
  out.insert(out.end(), cur.begin(), cur.end());
  for (auto it = kept_levels.rbegin(); it != kept_levels.rend(); ++it) {
    out.insert(out.end(), it->begin(), it->end());
  }
  return out;
}

/// Decodes a bitmap of known length from the front of `in`; `consumed`
/// receives the number of bytes read.
inline bytes rre_decode(std::span<const std::uint8_t> in, std::size_t bitmap_len, int k,
                        std::size_t& consumed)
{
  if (in.empty()) throw error(errc::corrupt_stream, "missing bitmap depth byte");
  const std::size_t depth = in[0];
  std::vector<std::size_t> lens{bitmap_len};
  for (std::size_t d = 0; d < depth; d++) lens.push_back(detail::rre_next_length(lens.back(), k));

  std::size_t at = 1;
  if (at + lens[depth] > in.size()) throw error(errc::corrupt_stream, "truncated bitmap");
  bytes cur(in.begin() + at, in.begin() + at + lens[depth]);
  at += lens[depth];

  for (std::size_t level = depth; level-- > 0;) {
    const std::size_t words = detail::round_up(lens[level], k) / k;
    const std::size_t kept = detail::popcount_prefix(cur, words);
    if (at + kept * k > in.size()) throw error(errc::corrupt_stream, "truncated bitmap level");
    bytes next(words * k, 0);
    std::size_t src = at;
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < words; i++) {
      if (detail::get_bit(cur, i)) {
        prev = detail::load_word(&in[src], k);
        src += k;
      }
      detail::store_word(&next[i * k], k, prev);
    }
    at = src;
    next.resize(lens[level]);
    cur = std::move(next);
  }
  consumed = at;
  return cur;
}

/// u32 input length, run-compressed nonzero bitmap (bit i set iff word i is
/// nonzero), then the nonzero words in order.
inline bytes rze_encode(std::span<const std::uint8_t> in, int k)
{
  const bytes src = detail::padded(in, k);
  const std::size_t words = src.size() / k;
  bytes bitmap((words + 7) / 8, 0);
  bytes payload;
  for (std::size_t i = 0; i < words; i++) {
    if (detail::load_word(&src[i * k], k) != 0) {
      detail::set_bit(bitmap, i);
      payload.insert(payload.end(), src.begin() + i * k, src.begin() + (i + 1) * k);
    }
  }
  bytes out;
  detail::put_u32(out, static_cast<std::uint32_t>(src.size()));
  const bytes packed = rre_encode(bitmap, k);
  out.insert(out.end(), packed.begin(), packed.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline bytes rze_decode(std::span<const std::uint8_t> in, int k)
{
  const std::size_t len = detail::get_u32(in, 0);
  if (len % k != 0) throw error(errc::corrupt_stream, "RZE length is not a whole number of words");
  // stages run on single chunks, so no intermediate can be much larger than one
  if (len > 2 * chunk_size + 4096) throw error(errc::corrupt_stream, "RZE length out of range");
  const std::size_t words = len / k;
  std::size_t consumed = 0;
  const bytes bitmap = rre_decode(in.subspan(4), (words + 7) / 8, k, consumed);
  std::size_t at = 4 + consumed;
  const std::size_t nonzero = detail::popcount_prefix(bitmap, words);
  if (in.size() - at != nonzero * k) {
    throw error(errc::corrupt_stream, "RZE payload size disagrees with its bitmap");
  }
  bytes out(len, 0);
  for (std::size_t i = 0; i < words; i++) {
    if (detail::get_bit(bitmap, i)) {
      std::copy_n(in.begin() + at, k, out.begin() + i * k);
      at += k;
    }
  }
  return out;
}

inline bytes apply_stage(const Stage& s, std::span<const std::uint8_t> in)
{
  switch (s.kind) {
    case StageKind::delta: return delta_encode_bytes(in, s.width);
    case StageKind::negabinary: return negabinary_encode_bytes(in, s.width);
    case StageKind::bit_shuffle: return bit_shuffle_encode(in, s.width);
    case StageKind::rze: return rze_encode(in, s.width);
  }
  throw error(errc::corrupt_stream, "unknown stage");
}

inline bytes invert_stage(const Stage& s, std::span<const std::uint8_t> in)
{
  switch (s.kind) {
    case StageKind::delta: return delta_decode_bytes(in, s.width);
    case StageKind::negabinary: return negabinary_decode_bytes(in, s.width);
    case StageKind::bit_shuffle: return bit_shuffle_decode(in, s.width);
    case StageKind::rze: return rze_decode(in, s.width);
  }
  throw error(errc::corrupt_stream, "unknown stage");
}

inline bytes encode_chunk(std::span<const std::uint8_t> chunk, const Pipeline& p)
{
  bytes cur(chunk.begin(), chunk.end());
  for (const Stage& s : p) cur = apply_stage(s, cur);
  return cur;
}

inline bytes decode_chunk(std::span<const std::uint8_t> payload, const Pipeline& p,
                          std::size_t length)
{
  bytes cur(payload.begin(), payload.end());
  for (auto it = p.rbegin(); it != p.rend(); ++it) cur = invert_stage(*it, cur);
  if (cur.size() < length || cur.size() - length >= 8) {
    throw error(errc::length_mismatch, "chunk decodes to the wrong length");
  }
  cur.resize(length);
  return cur;
}

namespace detail {

inline constexpr std::size_t directory_entry = 9;

}  // namespace detail

inline bytes compress_stream(std::span<const std::uint8_t> data, const Pipeline& p,
                             int threads = 0)
{
  const std::size_t chunks = (data.size() + chunk_size - 1) / chunk_size;
  std::vector<bytes> payloads(chunks);
  std::vector<std::uint8_t> flags(chunks, 0);

#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); c++) {
    const std::size_t base = static_cast<std::size_t>(c) * chunk_size;
    const auto raw = data.subspan(base, std::min(chunk_size, data.size() - base));
    bytes enc = encode_chunk(raw, p);
    if (enc.size() < raw.size()) {
      payloads[c] = std::move(enc);
      flags[c] = 1;
    } else {
      payloads[c].assign(raw.begin(), raw.end());
    }
  }

  bytes out;
  std::size_t total = 4 + chunks * detail::directory_entry;
  for (const bytes& b : payloads) total += b.size();
  out.reserve(total);
  detail::put_u32(out, static_cast<std::uint32_t>(chunks));
  for (std::size_t c = 0; c < chunks; c++) {
    const std::size_t base = c * chunk_size;
    detail::put_u32(out, static_cast<std::uint32_t>(std::min(chunk_size, data.size() - base)));
    detail::put_u32(out, static_cast<std::uint32_t>(payloads[c].size()));
    out.push_back(flags[c]);
  }
  for (const bytes& b : payloads) out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline bytes decompress_stream(std::span<const std::uint8_t> in, const Pipeline& p,
                               int threads = 0)
{
  const std::size_t chunks = detail::get_u32(in, 0);
  if (chunks > (in.size() - 4) / detail::directory_entry) {
    throw error(errc::corrupt_stream, "chunk directory exceeds the stream");
  }
  std::vector<std::size_t> raw_len(chunks), stored_len(chunks), offset(chunks);
  std::vector<std::uint8_t> flags(chunks);
  std::size_t at = 4 + chunks * detail::directory_entry;
  for (std::size_t c = 0; c < chunks; c++) {
    const std::size_t e = 4 + c * detail::directory_entry;
    raw_len[c] = detail::get_u32(in, e);
    stored_len[c] = detail::get_u32(in, e + 4);
    flags[c] = in[e + 8];
    if (raw_len[c] > chunk_size || (c + 1 < chunks && raw_len[c] != chunk_size) ||
        raw_len[c] == 0) {
      throw error(errc::corrupt_stream, "invalid chunk length in directory");
    }
    if (flags[c] > 1 || (flags[c] == 0 && stored_len[c] != raw_len[c])) {
      throw error(errc::corrupt_stream, "invalid chunk flag");
    }
    offset[c] = at;
    if (stored_len[c] > in.size() - at) throw error(errc::corrupt_stream, "truncated chunk payload");
    at += stored_len[c];
  }
  if (at != in.size()) throw error(errc::length_mismatch, "trailing bytes after the last chunk");

  std::vector<bytes> decoded(chunks);
  std::vector<std::exception_ptr> failures(chunks);
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); c++) {
    const auto payload = in.subspan(offset[c], stored_len[c]);
    try {
      if (flags[c] == 0) {
        decoded[c].assign(payload.begin(), payload.end());
      } else {
        decoded[c] = decode_chunk(payload, p, raw_len[c]);
      }
    } catch (...) {
      failures[c] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  bytes out;
  std::size_t total = 0;
  for (std::size_t len : raw_len) total += len;
  out.reserve(total);
  for (const bytes& b : decoded) out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace lopc::lossless

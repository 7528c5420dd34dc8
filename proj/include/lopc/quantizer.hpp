#pragma once

// Half-width error-bound quantization and (bin, subbin) decoding.
//
// Bin b owns the half-open real interval [(b - 0.5) eps, (b + 0.5) eps). Bin
// membership is decided exactly (fma sign tests), not just by the rounded
// quotient, so every code decodes inside its own bin and bins never overlap.
// Subbin s of bin b decodes to the s-th representable value above the smallest
// representable value of the bin.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "error.hpp"
#include "scalar_field.hpp"

namespace lopc {

enum class BoundMode : std::uint8_t { abs = 0, noa = 1 };

struct ErrorBound {
  BoundMode mode = BoundMode::abs;
  double value = 0.0;

  static ErrorBound absolute(double v) { return {BoundMode::abs, v}; }
  static ErrorBound normalized(double v) { return {BoundMode::noa, v}; }
};

struct ResolvedBound {
  double eps_abs = 0.0;
  double range = 0.0;  // max - min of the input, also recorded for ABS
};

template <field_value T>
struct code_traits;

template <>
struct code_traits<float> {
  using bin_type = std::int32_t;
  using subbin_type = std::uint32_t;
  using bits_type = std::uint32_t;
  static constexpr double bin_limit = 2147483647.0;
};

template <>
struct code_traits<double> {
  using bin_type = std::int64_t;
  using subbin_type = std::uint64_t;
  using bits_type = std::uint64_t;
  // b +- 0.5 must stay exact in double
  static constexpr double bin_limit = 1125899906842624.0;  // 2^50
};

template <field_value T>
using bin_t = typename code_traits<T>::bin_type;
template <field_value T>
using subbin_t = typename code_traits<T>::subbin_type;

/// Bins and subbins of every vertex.
template <field_value T>
struct QuantizedField {
  std::vector<bin_t<T>> bins;
  std::vector<subbin_t<T>> subbins;
};

/// Worker count for OpenMP regions; 0 means the runtime default.
inline int resolve_threads(int threads) noexcept
{
#ifdef _OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

template <field_value T>
ResolvedBound resolve(const ErrorBound& eb, std::span<const T> values)
{
  if (!(eb.value > 0.0) || !std::isfinite(eb.value)) {
    throw error(errc::invalid_bound, "error bound must be positive and finite");
  }
  if (values.empty()) throw error(errc::invalid_shape, "empty field");
  require_finite(values);

  const auto [lo, hi] = value_extent(values);
  ResolvedBound out;
  out.range = static_cast<double>(hi) - static_cast<double>(lo);
  if (eb.mode == BoundMode::abs) {
    out.eps_abs = eb.value;
  } else {
    if (!(out.range > 0.0)) {
      throw error(errc::zero_range, "normalized bound needs a non-constant field");
    }
    out.eps_abs = eb.value * out.range;
  }
  if (!(out.eps_abs > 0.0) || !std::isfinite(out.eps_abs)) {
    throw error(errc::invalid_bound, "resolved absolute bound is not a positive finite number");
  }
  return out;
}

namespace detail {

// Monotone integer image of the finite values of T; -0 and +0 share key 0.
template <field_value T>
std::int64_t order_key(T x) noexcept
{
  using bits = typename code_traits<T>::bits_type;
  constexpr bits sign = bits(1) << (sizeof(bits) * 8 - 1);
  const bits u = std::bit_cast<bits>(x);
  return (u & sign) ? -static_cast<std::int64_t>(u & ~sign) : static_cast<std::int64_t>(u);
}

template <field_value T>
T from_order_key(std::int64_t k) noexcept
{
  using bits = typename code_traits<T>::bits_type;
  constexpr bits sign = bits(1) << (sizeof(bits) * 8 - 1);
  const std::int64_t inf_key = order_key(std::numeric_limits<T>::infinity());
  if (k >= inf_key) return std::numeric_limits<T>::infinity();
  if (k <= -inf_key) return -std::numeric_limits<T>::infinity();
  if (k >= 0) return std::bit_cast<T>(static_cast<bits>(k));
  return std::bit_cast<T>(static_cast<bits>(-k) | sign);
}

// t < (bin - 0.5) * eps, exactly
inline bool below_bin(double bin, double eps, double t) noexcept
{
  return std::fma(bin - 0.5, eps, -t) > 0.0;
}

}  // namespace detail

/// bin = floor(x / eps + 0.5), corrected so that x lies in the exact bin
/// interval. Throws BinOverflow when the bin does not fit the code width.
template <field_value T>
bin_t<T> quantize(T x, double eps)
{
  const double xd = static_cast<double>(x);
  double b = std::floor(xd / eps + 0.5);
  constexpr double limit = code_traits<T>::bin_limit;
  if (!(std::abs(b) <= limit + 1.0)) {
    throw error(errc::bin_overflow,
                "bin index out of range; the error bound is too small for this data, "
                "store it losslessly instead");
  }
  while (std::fma(b - 0.5, eps, -xd) > 0.0) b -= 1.0;
  while (std::fma(b + 0.5, eps, -xd) <= 0.0) b += 1.0;
  if (b < -limit || b > limit) {
    throw error(errc::bin_overflow,
                "bin index out of range; the error bound is too small for this data, "
                "store it losslessly instead");
  }
  return static_cast<bin_t<T>>(b);
}

/// Smallest value of type T that is >= (bin - 0.5) * eps.
template <field_value T>
T bin_base(bin_t<T> bin, double eps) noexcept
{
  const double b = static_cast<double>(bin);
  const double lo = (b - 0.5) * eps;
  T t = static_cast<T>(lo);
  if (!std::isfinite(t)) t = lo < 0 ? std::numeric_limits<T>::lowest() : std::numeric_limits<T>::max();

  std::int64_t k = detail::order_key(t);
  while (detail::below_bin(b, eps, static_cast<double>(detail::from_order_key<T>(k)))) k++;
  for (;;) {
    const T prev = detail::from_order_key<T>(k - 1);
    if (!std::isfinite(prev) || detail::below_bin(b, eps, static_cast<double>(prev))) break;
    k--;
  }
  return detail::from_order_key<T>(k);
}

/// The value `subbin` representable steps above the bin's base.
template <field_value T>
T decode(bin_t<T> bin, subbin_t<T> subbin, double eps) noexcept
{
  const std::int64_t base = detail::order_key(bin_base<T>(bin, eps));
  const std::int64_t room = detail::order_key(std::numeric_limits<T>::infinity()) - base;
  if (subbin >= static_cast<std::uint64_t>(room)) return std::numeric_limits<T>::infinity();
  return detail::from_order_key<T>(base + static_cast<std::int64_t>(subbin));
}

/// Reconstruction at the bin center, without subbins. This is the plain
/// quantizer used as a non-order-preserving baseline.
template <field_value T>
T decode_mid_bin(bin_t<T> bin, double eps) noexcept
{
  return static_cast<T>(static_cast<double>(bin) * eps);
}

template <field_value T>
std::vector<bin_t<T>> quantize_field(std::span<const T> values, double eps, int threads = 0)
{
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<bin_t<T>> bins(values.size());
  std::ptrdiff_t first_bad = n;

#pragma omp parallel for num_threads(resolve_threads(threads)) reduction(min : first_bad)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    try {
      bins[i] = quantize(values[i], eps);
    } catch (const error&) {
      if (i < first_bad) first_bad = i;
    }
  }
  if (first_bad < n) {
    throw error(errc::bin_overflow,
                "value at index " + std::to_string(first_bad) +
                    " has no bin within the code width; the error bound is too small for "
                    "this data, store it losslessly instead");
  }
  return bins;
}

/// Hard gate run before any archive is emitted: every decoded value must stay
/// in its own bin and within eps of the original.
template <field_value T>
void verify_encode(std::span<const T> original, std::span<const bin_t<T>> bins,
                   std::span<const subbin_t<T>> subbins, double eps, int threads = 0)
{
  if (original.size() != bins.size() || bins.size() != subbins.size()) {
    throw error(errc::length_mismatch, "verify_encode: array lengths differ");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(original.size());
  std::ptrdiff_t first_bad = n;

#pragma omp parallel for num_threads(resolve_threads(threads)) reduction(min : first_bad)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    const T d = decode<T>(bins[i], subbins[i], eps);
    bool ok = std::isfinite(d) &&
              std::abs(static_cast<double>(d) - static_cast<double>(original[i])) <= eps;
    if (ok) {
      const double b = static_cast<double>(bins[i]);
      const double dd = static_cast<double>(d);
      ok = !detail::below_bin(b, eps, dd) && std::fma(b + 0.5, eps, -dd) > 0.0;
    }
    if (!ok && i < first_bad) first_bad = i;
  }
  if (first_bad < n) {
    throw bound_violation(static_cast<std::size_t>(first_bad),
                          "decoded value at index " + std::to_string(first_bad) +
                              " leaves its bin or exceeds the error bound");
  }
}

}  // namespace lopc

#pragma once

// Critical points of a PL field on the Freudenthal mesh, and the metrics used
// to compare an original field with a reconstruction.
//
// A vertex with an empty lower link is a minimum, one with an empty upper link
// a maximum. If both links are nonempty and each is a single connected
// component of the link graph, the vertex is regular; otherwise it is a
// saddle. All comparisons use the SoS order.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "grid_mesh.hpp"
#include "quantizer.hpp"
#include "scalar_field.hpp"

namespace lopc {

enum class CriticalType : std::uint8_t { regular, minimum, maximum, saddle };

constexpr std::string_view to_string(CriticalType t) noexcept
{
  switch (t) {
    case CriticalType::regular: return "regular";
    case CriticalType::minimum: return "minimum";
    case CriticalType::maximum: return "maximum";
    case CriticalType::saddle: return "saddle";
  }
  return "?";
}

/// Connected components of the slots in `subset` under the link graph.
inline int link_components(std::uint32_t subset,
                           const std::array<std::uint16_t, max_neighbors>& adjacency) noexcept
{
  int components = 0;
  while (subset) {
    std::uint32_t frontier = subset & (~subset + 1);
    std::uint32_t seen = frontier;
    while (frontier) {
      std::uint32_t next = 0;
      for (std::uint32_t f = frontier; f; f &= f - 1) next |= adjacency[std::countr_zero(f)];
      frontier = next & subset & ~seen;
      seen |= frontier;
    }
    subset &= ~seen;
    components++;
  }
  return components;
}

template <field_value T>
CriticalType classify(vertex_id v, std::span<const T> values, const GridShape& shape)
{
  std::uint32_t lower = 0, upper = 0;
  for_each_neighbor(shape, v, [&](int s, vertex_id n) {
    if (sos_less(values, n, v)) {
      lower |= 1u << s;
    } else {
      upper |= 1u << s;
    }
  });
  if (lower == 0) return CriticalType::minimum;
  if (upper == 0) return CriticalType::maximum;
  const auto adj = link_adjacency_masks(shape, v);
  if (link_components(lower, adj) == 1 && link_components(upper, adj) == 1) {
    return CriticalType::regular;
  }
  return CriticalType::saddle;
}

template <field_value T>
std::vector<CriticalType> classify_field(const ScalarField<T>& f, int threads = 0)
{
  std::vector<CriticalType> out(f.size());
  const std::span<const T> values(f.values);
  const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    out[i] = classify(static_cast<vertex_id>(i), values, f.shape);
  }
  return out;
}

struct CriticalCounts {
  std::size_t minima = 0, maxima = 0, saddles = 0;

  static CriticalCounts tally(std::span<const CriticalType> types) noexcept
  {
    CriticalCounts c;
    for (CriticalType t : types) {
      c.minima += t == CriticalType::minimum;
      c.maxima += t == CriticalType::maximum;
      c.saddles += t == CriticalType::saddle;
    }
    return c;
  }
};

struct CriticalPointReport {
  std::vector<CriticalType> original;
  std::vector<CriticalType> reconstructed;
  std::size_t false_positives = 0;  // critical only in the reconstruction
  std::size_t false_negatives = 0;  // critical only in the original
  std::size_t false_types = 0;      // critical in both, different type

  bool exact() const noexcept
  {
    return false_positives == 0 && false_negatives == 0 && false_types == 0;
  }
};

template <field_value T>
CriticalPointReport diff_critical(const ScalarField<T>& original,
                                  const ScalarField<T>& reconstructed, int threads = 0)
{
  if (!(original.shape == reconstructed.shape)) {
    throw error(errc::shape_mismatch, "diff_critical: fields differ in shape");
  }
  CriticalPointReport r;
  r.original = classify_field(original, threads);
  r.reconstructed = classify_field(reconstructed, threads);
  for (std::size_t i = 0; i < r.original.size(); i++) {
    const bool co = r.original[i] != CriticalType::regular;
    const bool cr = r.reconstructed[i] != CriticalType::regular;
    if (cr && !co) r.false_positives++;
    if (co && !cr) r.false_negatives++;
    if (co && cr && r.original[i] != r.reconstructed[i]) r.false_types++;
  }
  return r;
}

template <field_value T>
double max_abs_error(std::span<const T> original, std::span<const T> reconstructed)
{
  if (original.size() != reconstructed.size()) {
    throw error(errc::shape_mismatch, "max_abs_error: lengths differ");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < original.size(); i++) {
    m = std::max(m, std::abs(static_cast<double>(reconstructed[i]) -
                             static_cast<double>(original[i])));
  }
  return m;
}

/// 20 log10(R / RMSE) with R the original's value range. An exact match
/// yields +infinity.
template <field_value T>
double psnr(std::span<const T> original, std::span<const T> reconstructed)
{
  if (original.size() != reconstructed.size()) {
    throw error(errc::shape_mismatch, "psnr: lengths differ");
  }
  if (original.empty()) throw error(errc::invalid_shape, "psnr: empty field");
  const auto [lo, hi] = value_extent(original);
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  if (!(range > 0.0)) throw error(errc::zero_range, "psnr needs a non-constant original");
  double sum = 0.0;
  for (std::size_t i = 0; i < original.size(); i++) {
    const double d = static_cast<double>(reconstructed[i]) - static_cast<double>(original[i]);
    sum += d * d;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  const double rmse = std::sqrt(sum / static_cast<double>(original.size()));
  return 20.0 * std::log10(range / rmse);
}

}  // namespace lopc

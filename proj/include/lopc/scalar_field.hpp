#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "grid_mesh.hpp"

namespace lopc {

template <typename T>
concept field_value = std::same_as<T, float> || std::same_as<T, double>;

/// Vertex values of a regular grid, row-major with x fastest.
template <field_value T>
struct ScalarField {
  using value_type = T;

  GridShape shape;
  std::vector<T> values;

  ScalarField() = default;
  ScalarField(GridShape s, std::vector<T> v) : shape(std::move(s)), values(std::move(v))
  {
    if (values.size() != shape.size()) {
      throw error(errc::shape_mismatch, "value count does not match grid size");
    }
  }
  explicit ScalarField(GridShape s) : shape(std::move(s)), values(shape.size(), T(0)) {}

  std::size_t size() const noexcept { return values.size(); }
  T operator[](vertex_id v) const noexcept { return values[v]; }
  T& operator[](vertex_id v) noexcept { return values[v]; }
};

using AnyField = std::variant<ScalarField<float>, ScalarField<double>>;

/// Simulation of Simplicity: equal values are ordered by vertex index, so no
/// two distinct vertices ever compare equal.
template <field_value T>
constexpr bool sos_less(T fa, vertex_id a, T fb, vertex_id b) noexcept
{
  return fa < fb || (fa == fb && a < b);
}

template <field_value T>
bool sos_less(std::span<const T> f, vertex_id a, vertex_id b) noexcept
{
  return sos_less(f[a], a, f[b], b);
}

template <field_value T>
void require_finite(std::span<const T> values)
{
  for (std::size_t i = 0; i < values.size(); i++) {
    if (!std::isfinite(values[i])) {
      throw error(errc::non_finite, "value at index " + std::to_string(i) + " is not finite");
    }
  }
}

/// (min, max) over all values; the span must be non-empty.
template <field_value T>
std::pair<T, T> value_extent(std::span<const T> values)
{
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

}  // namespace lopc

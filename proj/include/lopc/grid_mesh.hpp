#pragma once

// Regular 2D/3D grids and their Freudenthal (Kuhn) simplicial subdivision.
//
// Every grid cell is split into rank! simplices, one per permutation of the
// axes. A vertex is then adjacent to the grid points at the offsets
// {e, -e : e in {0,1}^rank \ {0}}: 6 in 2D, 14 in 3D. Vertices are linearized
// row-major with x fastest, matching raw SDRBench volumes.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lopc {

using vertex_id = std::size_t;

inline constexpr int max_neighbors = 14;

struct Offset {
  int dx, dy, dz;
};

namespace detail {

// Slot i (i < half) is +e_i, slot i + half is -e_i. e_i walks {0,1}^rank \ {0}
// in increasing binary order with bit 0 = x, bit 1 = y, bit 2 = z.
inline constexpr std::array<Offset, 6> offsets_2d{{
    {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
    {-1, 0, 0}, {0, -1, 0}, {-1, -1, 0},
}};

inline constexpr std::array<Offset, 14> offsets_3d{{
    {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1},
    {-1, 0, 0}, {0, -1, 0}, {-1, -1, 0}, {0, 0, -1}, {-1, 0, -1}, {0, -1, -1}, {-1, -1, -1},
}};

}  // namespace detail

/// Vertex extents of a 2D or 3D grid. For rank 2 the z extent is 1.
class GridShape {
 public:
  GridShape() = default;

  GridShape(int rank, std::span<const std::size_t> dims) : rank_(rank)
  {
    if (rank != 2 && rank != 3) {
      throw error(errc::invalid_shape, "rank must be 2 or 3, got " + std::to_string(rank));
    }
    if (dims.size() != static_cast<std::size_t>(rank)) {
      throw error(errc::invalid_shape, "expected " + std::to_string(rank) + " extents");
    }
    std::size_t total = 1;
    for (int a = 0; a < rank; a++) {
      if (dims[a] == 0) throw error(errc::invalid_shape, "grid extents must be >= 1");
      if (total > std::numeric_limits<std::size_t>::max() / dims[a]) {
        throw error(errc::invalid_shape, "vertex count overflows the index range");
      }
      total *= dims[a];
      dims_[a] = dims[a];
    }
    size_ = total;
  }

  static GridShape make_2d(std::size_t nx, std::size_t ny)
  {
    const std::array<std::size_t, 2> d{nx, ny};
    return GridShape(2, d);
  }

  static GridShape make_3d(std::size_t nx, std::size_t ny, std::size_t nz)
  {
    const std::array<std::size_t, 3> d{nx, ny, nz};
    return GridShape(3, d);
  }

  int rank() const noexcept { return rank_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t dim(int axis) const noexcept { return dims_[axis]; }
  const std::array<std::size_t, 3>& dims() const noexcept { return dims_; }

  /// Number of neighbor slots of an interior vertex: 6 or 14.
  int slot_count() const noexcept { return rank_ == 2 ? 6 : 14; }

  std::span<const Offset> offsets() const noexcept
  {
    if (rank_ == 2) return detail::offsets_2d;
    return detail::offsets_3d;
  }

  vertex_id index(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept
  {
    return x + dims_[0] * (y + dims_[1] * z);
  }

  std::array<std::size_t, 3> coords(vertex_id v) const noexcept
  {
    const std::size_t x = v % dims_[0];
    const std::size_t rest = v / dims_[0];
    return {x, rest % dims_[1], rest / dims_[1]};
  }

  bool operator==(const GridShape& o) const noexcept
  {
    return rank_ == o.rank_ && dims_ == o.dims_;
  }

 private:
  int rank_ = 2;
  std::array<std::size_t, 3> dims_{0, 0, 1};
  std::size_t size_ = 0;
};

/// Slot of the offset pointing back at the vertex from slot `slot`.
inline int opposite_slot(const GridShape& shape, int slot) noexcept
{
  const int half = shape.slot_count() / 2;
  return slot < half ? slot + half : slot - half;
}

/// Positive slots lead to a larger linear index.
inline bool is_forward_slot(const GridShape& shape, int slot) noexcept
{
  return slot < shape.slot_count() / 2;
}

inline bool offset_in_bounds(const GridShape& shape, const std::array<std::size_t, 3>& c,
                             const Offset& o) noexcept
{
  const auto ok = [](std::size_t x, int d, std::size_t n) {
    return d >= 0 ? x + static_cast<std::size_t>(d) < n : x >= static_cast<std::size_t>(-d);
  };
  return ok(c[0], o.dx, shape.dim(0)) && ok(c[1], o.dy, shape.dim(1)) &&
         ok(c[2], o.dz, shape.dim(2));
}

inline vertex_id apply_offset(const GridShape& shape, vertex_id v, const Offset& o) noexcept
{
  const auto nx = static_cast<std::ptrdiff_t>(shape.dim(0));
  const auto ny = static_cast<std::ptrdiff_t>(shape.dim(1));
  return static_cast<vertex_id>(static_cast<std::ptrdiff_t>(v) + o.dx + nx * (o.dy + ny * o.dz));
}

/// Bit i set iff neighbor slot i of v lies inside the grid.
inline std::uint32_t in_bounds_slots(const GridShape& shape, vertex_id v) noexcept
{
  const auto c = shape.coords(v);
  const auto offs = shape.offsets();
  std::uint32_t mask = 0;
  for (int s = 0; s < shape.slot_count(); s++) {
    if (offset_in_bounds(shape, c, offs[s])) mask |= 1u << s;
  }
  return mask;
}

/// Calls f(slot, neighbor) for every in-bounds neighbor, in slot order.
template <typename F>
void for_each_neighbor(const GridShape& shape, vertex_id v, F&& f)
{
  const auto c = shape.coords(v);
  const auto offs = shape.offsets();
  for (int s = 0; s < shape.slot_count(); s++) {
    if (offset_in_bounds(shape, c, offs[s])) f(s, apply_offset(shape, v, offs[s]));
  }
}

inline std::vector<vertex_id> neighbors(vertex_id v, const GridShape& shape)
{
  std::vector<vertex_id> out;
  out.reserve(shape.slot_count());
  for_each_neighbor(shape, v, [&](int, vertex_id n) { out.push_back(n); });
  return out;
}

/// A full-dimensional simplex of the subdivision: rank + 1 vertices, listed
/// along its monotone chain from the cell's low corner.
struct Simplex {
  std::array<vertex_id, 4> vertices{};
  int count = 0;

  bool contains(vertex_id v) const noexcept
  {
    return std::find(vertices.begin(), vertices.begin() + count, v) != vertices.begin() + count;
  }
};

/// Enumerates every in-bounds Kuhn simplex incident to v. This enumeration is
/// the normative definition of link adjacency.
inline std::vector<Simplex> kuhn_simplices_incident(vertex_id v, const GridShape& shape)
{
  const int rank = shape.rank();
  const auto c = shape.coords(v);
  std::vector<Simplex> out;

  for (unsigned shift = 0; shift < (1u << rank); shift++) {
    // cell low corner = c - shift
    std::array<std::size_t, 3> corner = c;
    bool valid = true;
    for (int a = 0; a < rank; a++) {
      const std::size_t s = (shift >> a) & 1u;
      if (c[a] < s || c[a] - s + 1 >= shape.dim(a)) {
        valid = false;
        break;
      }
      corner[a] = c[a] - s;
    }
    if (!valid) continue;

    std::array<int, 3> perm{0, 1, 2};
    do {
      Simplex simplex;
      auto p = corner;
      simplex.vertices[simplex.count++] = shape.index(p[0], p[1], p[2]);
      for (int k = 0; k < rank; k++) {
        p[perm[k]] += 1;
        simplex.vertices[simplex.count++] = shape.index(p[0], p[1], p[2]);
      }
      if (simplex.contains(v)) out.push_back(simplex);
    } while (std::next_permutation(perm.begin(), perm.begin() + rank));
  }
  return out;
}

/// True iff v, a and b lie in a common incident simplex (a == b counts).
inline bool link_adjacent(vertex_id v, vertex_id a, vertex_id b, const GridShape& shape)
{
  if (a == b) return true;
  for (const Simplex& s : kuhn_simplices_incident(v, shape)) {
    if (s.contains(a) && s.contains(b)) return true;
  }
  return false;
}

namespace detail {

inline bool offsets_comparable(const Offset& p, const Offset& q) noexcept
{
  const bool le = p.dx <= q.dx && p.dy <= q.dy && p.dz <= q.dz;
  const bool ge = p.dx >= q.dx && p.dy >= q.dy && p.dz >= q.dz;
  return le || ge;
}

// {0, a, b} lie in one Kuhn simplex of some cell iff they form a chain under
// the componentwise order that fits in one unit cell.
inline bool offsets_share_simplex(const Offset& a, const Offset& b) noexcept
{
  constexpr Offset zero{0, 0, 0};
  const bool one_cell = std::abs(a.dx - b.dx) <= 1 && std::abs(a.dy - b.dy) <= 1 &&
                        std::abs(a.dz - b.dz) <= 1;
  return one_cell && offsets_comparable(zero, a) && offsets_comparable(zero, b) &&
         offsets_comparable(a, b);
}

template <std::size_t N>
constexpr std::array<std::uint16_t, N> interior_link_masks(const std::array<Offset, N>& offs)
{
  std::array<std::uint16_t, N> masks{};
  for (std::size_t i = 0; i < N; i++) {
    for (std::size_t j = 0; j < N; j++) {
      if (i != j && offsets_share_simplex(offs[i], offs[j])) masks[i] |= std::uint16_t(1u << j);
    }
  }
  return masks;
}

inline const std::array<std::uint16_t, 6> link_masks_2d = interior_link_masks(offsets_2d);
inline const std::array<std::uint16_t, 14> link_masks_3d = interior_link_masks(offsets_3d);

}  // namespace detail

/// Closed-form link adjacency of all neighbor slots of v: bit j of entry i is
/// set iff slots i and j are both in bounds and link-adjacent (i != j).
///
/// Two in-bounds neighbors whose offsets form a chain with 0 always fit a cell
/// inside the grid along the axes they span; an axis they do not span only
/// needs an extent of at least 2.
inline std::array<std::uint16_t, max_neighbors> link_adjacency_masks(const GridShape& shape,
                                                                     vertex_id v)
{
  std::array<std::uint16_t, max_neighbors> out{};
  for (int a = 0; a < shape.rank(); a++) {
    if (shape.dim(a) < 2) return out;
  }
  const std::uint32_t present = in_bounds_slots(shape, v);
  const int n = shape.slot_count();
  for (int i = 0; i < n; i++) {
    if (!((present >> i) & 1u)) continue;
    const std::uint16_t m = shape.rank() == 2 ? detail::link_masks_2d[i] : detail::link_masks_3d[i];
    out[i] = static_cast<std::uint16_t>(m & present);
  }
  return out;
}

}  // namespace lopc

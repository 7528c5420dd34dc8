#pragma once

// Least subbin assignment that reproduces the original local order among
// same-bin neighbors.
//
// For same-bin neighbors n and p with n before p in the SoS order, decoding
// requires subbin(p) >= subbin(n) + w, where w = 1 iff idx(n) > idx(p): with
// equal subbins the reconstructed values tie and the index would order them
// the wrong way round. These edges follow a strict total order, so they form a
// DAG, and the constraint system has a unique least solution.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <vector>

#include "grid_mesh.hpp"
#include "quantizer.hpp"
#include "scalar_field.hpp"

namespace lopc {

/// Per-vertex neighbor flags. For neighbor slot s: bit 2s = same bin,
/// bit 2s+1 = the neighbor precedes the vertex in the original SoS order.
/// Both bits are zero for out-of-bounds slots.
using neighbor_flags = std::uint32_t;

constexpr bool flag_same_bin(neighbor_flags f, int slot) noexcept
{
  return (f >> (2 * slot)) & 1u;
}

constexpr bool flag_neighbor_less(neighbor_flags f, int slot) noexcept
{
  return (f >> (2 * slot + 1)) & 1u;
}

template <field_value T, typename Bin>
std::vector<neighbor_flags> compute_flags(std::span<const T> values, std::span<const Bin> bins,
                                          const GridShape& shape, int threads = 0)
{
  if (values.size() != shape.size() || bins.size() != shape.size()) {
    throw error(errc::shape_mismatch, "compute_flags: arrays do not match the grid");
  }
  std::vector<neighbor_flags> flags(shape.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(shape.size());

#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    const auto p = static_cast<vertex_id>(i);
    neighbor_flags f = 0;
    for_each_neighbor(shape, p, [&](int s, vertex_id q) {
      if (bins[q] == bins[p]) f |= 1u << (2 * s);
      if (sos_less(values, q, p)) f |= 1u << (2 * s + 1);
    });
    flags[i] = f;
  }
  return flags;
}

/// Oracle: one pass over the constraint DAG in topological (Kahn) order.
template <typename Subbin>
std::vector<Subbin> fixpoint_reference(std::span<const neighbor_flags> flags,
                                       const GridShape& shape)
{
  const std::size_t n = shape.size();
  const auto offs = shape.offsets();
  const int slots = shape.slot_count();
  std::vector<Subbin> subbins(n, 0);
  std::vector<int> pending(n, 0);

  for (vertex_id p = 0; p < n; p++) {
    for (int s = 0; s < slots; s++) {
      if (flag_same_bin(flags[p], s) && flag_neighbor_less(flags[p], s)) pending[p]++;
    }
  }
  std::queue<vertex_id> ready;
  for (vertex_id p = 0; p < n; p++) {
    if (pending[p] == 0) ready.push(p);
  }
  while (!ready.empty()) {
    const vertex_id p = ready.front();
    ready.pop();
    for (int s = 0; s < slots; s++) {
      if (!flag_same_bin(flags[p], s) || flag_neighbor_less(flags[p], s)) continue;
      const vertex_id q = apply_offset(shape, p, offs[s]);
      const Subbin need = subbins[p] + (p > q ? 1 : 0);
      if (subbins[q] < need) subbins[q] = need;
      if (--pending[q] == 0) ready.push(q);
    }
  }
  return subbins;
}

template <typename Subbin>
struct FixpointResult {
  std::vector<Subbin> subbins;
  std::size_t iterations = 0;  // worklist sweeps, including the initial full one
  std::size_t raises = 0;      // successful subbin increases
};

namespace detail {

template <typename U>
U atomic_fetch_max(std::atomic_ref<U> a, U v) noexcept
{
  U cur = a.load(std::memory_order_relaxed);
  while (cur < v && !a.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
  return cur;
}

}  // namespace detail

/// Parallel worklist iteration. Starts from all-zero subbins with every vertex
/// on the worklist; a vertex whose subbin is raised puts its greater same-bin
/// neighbors on the next worklist, deduplicated by an iteration stamp. The
/// result equals fixpoint_reference for any thread count. threads = 1 runs the
/// same code with a single worker.
template <typename Subbin>
FixpointResult<Subbin> fixpoint_worklist(std::span<const neighbor_flags> flags,
                                         const GridShape& shape, int threads = 0)
{
  const std::size_t n = shape.size();
  const auto offs = shape.offsets();
  const int slots = shape.slot_count();
  const int workers = resolve_threads(threads);

  FixpointResult<Subbin> out;
  out.subbins.assign(n, 0);
  std::vector<std::uint32_t> stamp(n, 0);
  std::vector<vertex_id> read(n), write(n);
  for (vertex_id v = 0; v < n; v++) read[v] = v;
  std::size_t read_size = n;
  std::atomic<std::size_t> write_size{0};

  Subbin* const sub = out.subbins.data();
  std::uint32_t* const stamps = stamp.data();
  vertex_id* wl_write = write.data();

  std::uint32_t iteration = 0;
  while (read_size > 0) {
    iteration++;
    const vertex_id* wl_read = read.data();
    std::size_t raises = 0;

#pragma omp parallel for num_threads(workers) schedule(static) reduction(+ : raises)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(read_size); i++) {
      const vertex_id p = wl_read[i];
      const neighbor_flags f = flags[p];
      Subbin n_max = 0;
      for (int s = 0; s < slots; s++) {
        if (!flag_same_bin(f, s) || !flag_neighbor_less(f, s)) continue;
        const vertex_id q = apply_offset(shape, p, offs[s]);
        const Subbin tie = is_forward_slot(shape, s) ? 1 : 0;  // idx(q) > idx(p)
        const Subbin val = std::atomic_ref<Subbin>(sub[q]).load(std::memory_order_relaxed);
        if (val + tie > n_max) n_max = val + tie;
      }
      if (detail::atomic_fetch_max(std::atomic_ref<Subbin>(sub[p]), n_max) < n_max) {
        raises++;
        for (int s = 0; s < slots; s++) {
          if (!flag_same_bin(f, s) || flag_neighbor_less(f, s)) continue;
          const vertex_id q = apply_offset(shape, p, offs[s]);
          if (detail::atomic_fetch_max(std::atomic_ref<std::uint32_t>(stamps[q]), iteration) <
              iteration) {
            wl_write[write_size.fetch_add(1, std::memory_order_relaxed)] = q;
          }
        }
      }
    }

    out.raises += raises;
    out.iterations++;
    read_size = write_size.exchange(0);
    read.swap(write);
    wl_write = write.data();
  }
  return out;
}

/// Number of same-bin constraint edges n -> p with subbin(p) < subbin(n) + w.
template <typename Subbin>
std::size_t unsatisfied_constraints(std::span<const neighbor_flags> flags,
                                    std::span<const Subbin> subbins, const GridShape& shape)
{
  const auto offs = shape.offsets();
  std::size_t bad = 0;
  for (vertex_id p = 0; p < shape.size(); p++) {
    for (int s = 0; s < shape.slot_count(); s++) {
      if (!flag_same_bin(flags[p], s) || !flag_neighbor_less(flags[p], s)) continue;
      const vertex_id q = apply_offset(shape, p, offs[s]);
      if (subbins[p] < subbins[q] + (q > p ? 1 : 0)) bad++;
    }
  }
  return bad;
}

/// Mesh edges whose SoS order differs between the two fields; 0 means the
/// local order is preserved.
template <field_value T>
std::size_t check_local_order(const ScalarField<T>& original, const ScalarField<T>& decoded,
                              int threads = 0)
{
  if (!(original.shape == decoded.shape) || original.size() != decoded.size()) {
    throw error(errc::shape_mismatch, "check_local_order: fields differ in shape");
  }
  const GridShape& shape = original.shape;
  const std::span<const T> a(original.values), b(decoded.values);
  const auto n = static_cast<std::ptrdiff_t>(shape.size());
  std::size_t violations = 0;

#pragma omp parallel for num_threads(resolve_threads(threads)) reduction(+ : violations)
  for (std::ptrdiff_t i = 0; i < n; i++) {
    const auto u = static_cast<vertex_id>(i);
    for_each_neighbor(shape, u, [&](int s, vertex_id v) {
      if (!is_forward_slot(shape, s)) return;
      if (sos_less(a, u, v) != sos_less(b, u, v)) violations++;
    });
  }
  return violations;
}

}  // namespace lopc

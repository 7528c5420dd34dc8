#pragma once

// Independent reference implementations used only by tests.

#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lopc/grid_mesh.hpp"
#include "lopc/lossless_stages.hpp"
#include "lopc/scalar_field.hpp"
#include "lopc/topo_verify.hpp"

namespace lopc::testing {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x)
  {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

/// Classification from an explicitly built link graph: link edges are the
/// vertex pairs sharing an enumerated simplex with v; components by
/// union-find. Does not use the closed-form link masks.
template <field_value T>
CriticalType brute_force_classify(vertex_id v, std::span<const T> f, const GridShape& shape)
{
  const std::vector<vertex_id> link = neighbors(v, shape);
  std::vector<bool> lower(link.size());
  bool any_lower = false, any_upper = false;
  for (std::size_t i = 0; i < link.size(); i++) {
    lower[i] = f[link[i]] < f[v] || (f[link[i]] == f[v] && link[i] < v);
    any_lower |= lower[i];
    any_upper |= !lower[i];
  }
  if (!any_lower) return CriticalType::minimum;
  if (!any_upper) return CriticalType::maximum;

  std::set<std::pair<vertex_id, vertex_id>> edges;
  for (const Simplex& s : kuhn_simplices_incident(v, shape)) {
    for (int i = 0; i < s.count; i++) {
      for (int j = 0; j < s.count; j++) {
        if (s.vertices[i] != v && s.vertices[j] != v && s.vertices[i] != s.vertices[j]) {
          edges.insert({s.vertices[i], s.vertices[j]});
        }
      }
    }
  }
  const auto slot_of = [&](vertex_id u) {
    return static_cast<std::size_t>(std::find(link.begin(), link.end(), u) - link.begin());
  };
  const auto count = [&](bool want_lower) {
    UnionFind uf(link.size());
    for (const auto& [a, b] : edges) {
      const std::size_t ia = slot_of(a), ib = slot_of(b);
      if (lower[ia] == want_lower && lower[ib] == want_lower) uf.unite(ia, ib);
    }
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < link.size(); i++) {
      if (lower[i] == want_lower) roots.insert(uf.find(i));
    }
    return roots.size();
  };
  if (count(true) == 1 && count(false) == 1) return CriticalType::regular;
  return CriticalType::saddle;
}

/// Component label per vertex over same-bin mesh edges.
template <typename Bin>
std::vector<std::size_t> same_bin_components(std::span<const Bin> bins, const GridShape& shape)
{
  UnionFind uf(shape.size());
  for (vertex_id v = 0; v < shape.size(); v++) {
    for (vertex_id n : neighbors(v, shape)) {
      if (bins[n] == bins[v]) uf.unite(v, n);
    }
  }
  std::vector<std::size_t> label(shape.size());
  for (vertex_id v = 0; v < shape.size(); v++) label[v] = uf.find(v);
  return label;
}

/// Bit-by-bit transpose: output bit j*w + i = bit j of word i.
inline lossless::bytes naive_bit_shuffle(std::span<const std::uint8_t> in, int k)
{
  const std::size_t w = in.size() / k;
  lossless::bytes out(in.size(), 0);
  for (std::size_t i = 0; i < w; i++) {
    for (int j = 0; j < 8 * k; j++) {
      const std::size_t src = i * 8 * k + j;
      if ((in[src / 8] >> (src % 8)) & 1) {
        const std::size_t dst = j * w + i;
        out[dst / 8] |= static_cast<std::uint8_t>(1u << (dst % 8));
      }
    }
  }
  return out;
}

}  // namespace lopc::testing

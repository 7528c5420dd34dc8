#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "lopc/order_fixpoint.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace lopc;
using lopc::testing::noise_field;
using lopc::testing::plateau_field;
using lopc::testing::smooth_field;

namespace {

template <typename T>
std::vector<neighbor_flags> flags_for(const ScalarField<T>& f, double eps,
                                      std::vector<bin_t<T>>* bins_out = nullptr)
{
  const auto bins = quantize_field(std::span<const T>(f.values), eps);
  auto flags = compute_flags(std::span<const T>(f.values), std::span<const bin_t<T>>(bins), f.shape);
  if (bins_out) *bins_out = bins;
  return flags;
}

template <typename T>
ScalarField<T> decode_field(const ScalarField<T>& f, std::span<const bin_t<T>> bins,
                            std::span<const subbin_t<T>> subs, double eps)
{
  ScalarField<T> out(f.shape);
  for (std::size_t i = 0; i < f.size(); i++) out.values[i] = decode<T>(bins[i], subs[i], eps);
  return out;
}

}  // namespace

TEST(ComputeFlags, ConstantFieldFallsBackToIndex)
{
  const auto s = GridShape::make_3d(3, 3, 3);
  const ScalarField<float> f(s, std::vector<float>(s.size(), 4.0f));
  const auto flags = flags_for(f, 1e6);
  for (vertex_id p = 0; p < s.size(); p++) {
    for_each_neighbor(s, p, [&](int slot, vertex_id n) {
      EXPECT_TRUE(flag_same_bin(flags[p], slot));
      EXPECT_EQ(flag_neighbor_less(flags[p], slot), n < p);
    });
  }
}

TEST(ComputeFlags, SteepRampHasNoSameBinPairs)
{
  const auto s = GridShape::make_2d(8, 6);
  ScalarField<double> f(s);
  for (vertex_id v = 0; v < s.size(); v++) f.values[v] = static_cast<double>(v);
  const auto flags = flags_for(f, 0.1);
  for (vertex_id p = 0; p < s.size(); p++) {
    for (int slot = 0; slot < s.slot_count(); slot++) EXPECT_FALSE(flag_same_bin(flags[p], slot));
  }
}

TEST(ComputeFlags, TwoPointExample)
{
  const auto s = GridShape::make_2d(2, 1);
  const ScalarField<double> f(s, {1.01, 1.00});
  const auto flags = flags_for(f, 0.1);
  EXPECT_TRUE(flag_same_bin(flags[0], 0));
  EXPECT_TRUE(flag_neighbor_less(flags[0], 0));
  EXPECT_EQ(flags[0] >> 2, 0u);  // other slots are out of bounds
}

TEST(FixpointReference, NoSameBinPairsGivesZeros)
{
  const auto s = GridShape::make_2d(8, 6);
  ScalarField<double> f(s);
  for (vertex_id v = 0; v < s.size(); v++) f.values[v] = static_cast<double>(v);
  const auto subs = fixpoint_reference<std::uint64_t>(flags_for(f, 0.1), s);
  EXPECT_TRUE(std::all_of(subs.begin(), subs.end(), [](auto x) { return x == 0; }));
}

TEST(FixpointReference, TwoPointTieRules)
{
  const auto s = GridShape::make_2d(2, 1);
  {
    const ScalarField<double> f(s, {1.00, 1.01});
    const auto subs = fixpoint_reference<std::uint64_t>(flags_for(f, 0.1), s);
    EXPECT_EQ(subs, (std::vector<std::uint64_t>{0, 0}));
  }
  {
    const ScalarField<double> f(s, {1.01, 1.00});
    const auto subs = fixpoint_reference<std::uint64_t>(flags_for(f, 0.1), s);
    EXPECT_EQ(subs, (std::vector<std::uint64_t>{1, 0}));
  }
}

TEST(Fixpoint, DecreasingChainUsesFullRange)
{
  // one bin, values fall with the index: every edge needs w = 1
  const std::size_t n = 40;
  const auto s = GridShape::make_2d(n, 1);
  ScalarField<double> f(s);
  for (std::size_t i = 0; i < n; i++) f.values[i] = 1.0 - 1e-4 * static_cast<double>(i);
  const auto flags = flags_for(f, 0.1);
  const auto ref = fixpoint_reference<std::uint64_t>(flags, s);
  const auto wl = fixpoint_worklist<std::uint64_t>(flags, s, 1);
  for (std::size_t i = 0; i < n; i++) EXPECT_EQ(ref[i], n - 1 - i);
  EXPECT_EQ(wl.subbins, ref);
  std::set<std::uint64_t> distinct(ref.begin(), ref.end());
  EXPECT_EQ(distinct.size(), n);
  EXPECT_LE(wl.raises, n * (n - 1) / 2);
}

TEST(Fixpoint, ConsistentInputNeedsNoRaises)
{
  const auto s = GridShape::make_3d(5, 4, 3);
  ScalarField<float> f(s);
  for (vertex_id v = 0; v < s.size(); v++) f.values[v] = 1.0f + 1e-3f * static_cast<float>(v);
  const auto wl = fixpoint_worklist<std::uint32_t>(flags_for(f, 100.0), s, 1);
  EXPECT_EQ(wl.raises, 0u);
  EXPECT_EQ(wl.iterations, 1u);
}

TEST(Fixpoint, WorklistMatchesReferenceOnRandomFields)
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; trial++) {
    const bool three = trial % 2 == 0;
    std::uniform_int_distribution<std::size_t> ext(2, three ? 8 : 20);
    const GridShape s = three ? GridShape::make_3d(ext(rng), ext(rng), ext(rng))
                              : GridShape::make_2d(ext(rng), ext(rng));
    const auto f = trial % 3 == 0 ? plateau_field<double>(s, trial)
                                  : (trial % 3 == 1 ? noise_field<double>(s, trial)
                                                    : smooth_field<double>(s, trial));
    const double range = 2.0;
    for (double rel : {1.0, 1e-1, 1e-2}) {
      const auto flags = flags_for(f, rel * range);
      const auto ref = fixpoint_reference<std::uint64_t>(flags, s);
      for (int threads : {1, 3, 4}) {
        const auto wl = fixpoint_worklist<std::uint64_t>(flags, s, threads);
        ASSERT_EQ(wl.subbins, ref) << "trial " << trial << " threads " << threads;
      }
      EXPECT_EQ(unsatisfied_constraints<std::uint64_t>(flags, ref, s), 0u);
    }
  }
}

TEST(Fixpoint, RangeBoundPerComponent)
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; trial++) {
    const GridShape s = GridShape::make_3d(7, 6, 5);
    const auto f = trial % 2 ? plateau_field<float>(s, trial, 4) : noise_field<float>(s, trial);
    std::vector<bin_t<float>> bins;
    const auto flags = flags_for(f, 0.5, &bins);
    const auto wl = fixpoint_worklist<std::uint32_t>(flags, s, 2);
    const auto label = lopc::testing::same_bin_components<bin_t<float>>(bins, s);

    std::map<std::size_t, std::size_t> size;
    std::map<std::size_t, std::set<float>> values;
    std::map<std::size_t, std::uint32_t> max_sub;
    for (vertex_id v = 0; v < s.size(); v++) {
      size[label[v]]++;
      values[label[v]].insert(f.values[v]);
      max_sub[label[v]] = std::max(max_sub[label[v]], wl.subbins[v]);
    }
    std::size_t budget = 0;
    for (const auto& [c, n] : size) {
      EXPECT_LE(max_sub[c], n - 1);
      EXPECT_LE(max_sub[c], values[c].size() - 1);
      budget += n * (n - 1) / 2;
    }
    EXPECT_LE(wl.raises, budget);
  }
}

TEST(CheckLocalOrder, IdenticalFieldsHaveNoViolations)
{
  const auto s = GridShape::make_3d(6, 6, 6);
  const auto f = noise_field<double>(s, 3);
  EXPECT_EQ(check_local_order(f, f), 0u);
}

TEST(CheckLocalOrder, RoundTripThroughSubbinsPreservesOrder)
{
  const auto s = GridShape::make_3d(9, 8, 7);
  for (int seed = 0; seed < 5; seed++) {
    const auto f = noise_field<float>(s, seed);
    for (double eps : {0.02, 0.2, 2.0}) {
      std::vector<bin_t<float>> bins;
      const auto flags = flags_for(f, eps, &bins);
      const auto subs = fixpoint_worklist<std::uint32_t>(flags, s).subbins;
      const auto g = decode_field<float>(f, bins, subs, eps);
      EXPECT_EQ(check_local_order(f, g), 0u);
    }
  }
}

TEST(CheckLocalOrder, MidBinReconstructionBreaksOrder)
{
  const auto s = GridShape::make_3d(8, 8, 8);
  const auto f = noise_field<double>(s, 8);
  const double eps = 0.2;
  ScalarField<double> g(s);
  for (std::size_t i = 0; i < f.size(); i++) g.values[i] = decode_mid_bin<double>(quantize(f.values[i], eps), eps);
  EXPECT_GT(check_local_order(f, g), 0u);
}

TEST(CheckLocalOrder, ShapeMismatch)
{
  const ScalarField<float> a(GridShape::make_2d(4, 4)), b(GridShape::make_2d(2, 8));
  EXPECT_THROW(check_local_order(a, b), error);
}

#include <cmath>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "lopc/quantizer.hpp"

using namespace lopc;
using rational = boost::multiprecision::cpp_rational;

namespace {

template <typename T>
rational exact(T x)
{
  return rational(static_cast<double>(x));
}

// Exact-arithmetic oracle for bin membership: (b - 1/2) eps <= x < (b + 1/2) eps.
template <typename T>
bool in_bin_exact(T x, std::int64_t b, double eps)
{
  const rational e(eps), half(1, 2);
  const rational lo = (rational(b) - half) * e, hi = (rational(b) + half) * e;
  return lo <= exact(x) && exact(x) < hi;
}

}  // namespace

TEST(Resolve, AbsIsIdentity)
{
  const std::vector<double> v{3.0, -1.0, 7.5};
  const auto r = resolve(ErrorBound::absolute(0.1), std::span<const double>(v));
  EXPECT_EQ(r.eps_abs, 0.1);
  EXPECT_EQ(r.range, 8.5);
}

TEST(Resolve, NoaScalesByRange)
{
  const std::vector<float> v{0.f, 12.f, 50.f, 3.f};
  const auto r = resolve(ErrorBound::normalized(1e-2), std::span<const float>(v));
  EXPECT_DOUBLE_EQ(r.eps_abs, 0.5);
}

TEST(Resolve, Errors)
{
  const std::vector<double> flat(10, 2.5);
  try {
    resolve(ErrorBound::normalized(1e-2), std::span<const double>(flat));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::zero_range);
  }
  const std::vector<double> bad{1.0, std::nan("")};
  try {
    resolve(ErrorBound::absolute(1.0), std::span<const double>(bad));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::non_finite);
  }
  const std::vector<double> ok{1.0, 2.0};
  EXPECT_THROW(resolve(ErrorBound::absolute(0.0), std::span<const double>(ok)), error);
  EXPECT_THROW(resolve(ErrorBound::absolute(-1.0), std::span<const double>(ok)), error);
}

TEST(Quantize, Examples)
{
  EXPECT_EQ(quantize(1.00, 0.1), 10);
  EXPECT_EQ(quantize(0.96, 0.1), 10);
  EXPECT_EQ(quantize(0.0, 0.1), 0);
  EXPECT_EQ(quantize(1.00f, 0.1), 10);
  EXPECT_EQ(quantize(0.96f, 0.1), 10);
}

TEST(Quantize, OverflowIsAnError)
{
  try {
    quantize(1e30f, 1e-30);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::bin_overflow);
  }
  EXPECT_THROW(quantize(1e300, 1e-300), error);
}

TEST(Quantize, BinsAreExactHalfOpenIntervals)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-100, 100), logeps(-6, 1);
  for (int i = 0; i < 20000; i++) {
    const double eps = std::pow(10.0, logeps(rng));
    const double xd = val(rng);
    const auto bd = quantize(xd, eps);
    EXPECT_TRUE(in_bin_exact(xd, bd, eps)) << xd << " " << eps;
    const float xf = static_cast<float>(xd);
    EXPECT_TRUE(in_bin_exact(xf, quantize(xf, eps), eps));
    // exact boundary values belong to the upper bin
    const double edge = (static_cast<double>(bd) + 0.5) * eps;
    EXPECT_TRUE(in_bin_exact(edge, quantize(edge, eps), eps));
  }
}

TEST(Quantize, Monotone)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-10, 10);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = val(rng);
  std::sort(xs.begin(), xs.end());
  for (double eps : {1e-3, 0.1, 0.37, 3.0}) {
    for (std::size_t i = 1; i < xs.size(); i++) {
      EXPECT_LE(quantize(xs[i - 1], eps), quantize(xs[i], eps));
    }
  }
}

TEST(Decode, BaseIsSmallestRepresentableInBin)
{
  EXPECT_EQ(decode<double>(0, 0, 0.1), -0.05);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> bin(-100000, 100000);
  std::uniform_real_distribution<double> logeps(-7, 2);
  const rational half(1, 2);
  for (int i = 0; i < 5000; i++) {
    const double eps = std::pow(10.0, logeps(rng));
    const auto b = bin(rng);
    const rational lo = (rational(b) - half) * rational(eps);
    const double bd = bin_base<double>(b, eps);
    EXPECT_GE(exact(bd), lo);
    EXPECT_LT(exact(std::nextafter(bd, -INFINITY)), lo);
    const float bf = bin_base<float>(static_cast<std::int32_t>(b), eps);
    EXPECT_GE(exact(bf), lo);
    EXPECT_LT(exact(std::nextafter(bf, -INFINITY)), lo);
  }
}

TEST(Decode, StrictlyIncreasingInCode)
{
  for (double eps : {0.1, 1e-5, 3.0}) {
    double prev = -INFINITY;
    for (std::int64_t b = -30; b <= 30; b++) {
      for (std::uint64_t s = 0; s < 4; s++) {
        const double d = decode<double>(b, s, eps);
        EXPECT_GT(d, prev);
        prev = d;
      }
    }
    float prevf = -INFINITY;
    for (std::int32_t b = -30; b <= 30; b++) {
      for (std::uint32_t s = 0; s < 4; s++) {
        const float d = decode<float>(b, s, eps);
        EXPECT_GT(d, prevf);
        prevf = d;
      }
    }
  }
}

TEST(Decode, CrossesZeroWithoutRepeatingAValue)
{
  // bin 0 straddles zero; -0 and +0 must not both be reachable
  // a subnormal bound makes bin 0 only ~2000 representable values wide
  const double eps = 1e-320;
  const double base = bin_base<double>(0, eps);
  EXPECT_LT(base, 0.0);
  double prev = base;
  bool crossed = false;
  for (std::uint64_t s = 1; s < 2000; s++) {
    const double d = decode<double>(0, s, eps);
    EXPECT_GT(d, prev);
    crossed |= d > 0.0;
    prev = d;
  }
  EXPECT_TRUE(crossed);
}

TEST(Decode, QuantizeOfBaseIsIdentity)
{
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int32_t> bin(-1000000, 1000000);
  std::uniform_real_distribution<double> logeps(-8, 3);
  for (int i = 0; i < 20000; i++) {
    const double eps = std::pow(10.0, logeps(rng));
    const auto b = bin(rng);
    EXPECT_EQ(quantize(decode<double>(b, 0, eps), eps), b);
    const float f = decode<float>(b, 0, eps);
    // f32 bins narrower than one ulp are empty; skip those
    if (std::isfinite(f) && in_bin_exact(f, b, eps)) {
      EXPECT_EQ(quantize(f, eps), b);
    }
  }
}

TEST(VerifyEncode, AcceptsZeroSubbins)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(-5, 5);
  std::vector<double> x(4000);
  for (auto& v : x) v = val(rng);
  for (double eps : {1e-4, 0.01, 0.5, 20.0}) {
    const auto bins = quantize_field(std::span<const double>(x), eps);
    const std::vector<std::uint64_t> subs(x.size(), 0);
    EXPECT_NO_THROW(verify_encode<double>(x, bins, subs, eps));
  }
  const std::vector<float> zeros(100, 0.f);
  const auto zb = quantize_field(std::span<const float>(zeros), 0.3);
  const std::vector<std::uint32_t> zs(zeros.size(), 0);
  EXPECT_NO_THROW(verify_encode<float>(zeros, zb, zs, 0.3));
}

TEST(VerifyEncode, CorruptSubbinIsCaught)
{
  const std::vector<float> x{1.00f, 1.01f, 3.0f};
  const double eps = 0.1;
  const auto bins = quantize_field(std::span<const float>(x), eps);
  std::vector<std::uint32_t> subs{0, 1u << 23, 0};  // about 0.5 above the bin base
  try {
    verify_encode<float>(x, bins, subs, eps);
    FAIL();
  } catch (const bound_violation& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(DecodeMidBin, WithinHalfBound)
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int i = 0; i < 1000; i++) {
    const double x = val(rng);
    const double eps = 0.01;
    EXPECT_LE(std::abs(decode_mid_bin<double>(quantize(x, eps), eps) - x), eps / 2 + 1e-15);
  }
}

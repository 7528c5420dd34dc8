#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "order_fixpoint.hpp"
#include "topo_verify.hpp"

namespace lopc {

/// Everything the verifier checks for one (original, reconstruction) pair.
struct VerificationReport {
  std::size_t vertices = 0;
  double eps_abs = 0.0;
  double max_abs_error = 0.0;
  bool bound_ok = false;
  std::size_t order_violations = 0;
  CriticalCounts original_counts;
  CriticalCounts reconstructed_counts;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t false_types = 0;
  double psnr = 0.0;  // +inf on an exact match, NaN for a constant original

  bool passed() const noexcept
  {
    return bound_ok && order_violations == 0 && false_positives == 0 && false_negatives == 0 &&
           false_types == 0;
  }
};

template <field_value T>
VerificationReport verify_reconstruction(const ScalarField<T>& original,
                                         const ScalarField<T>& reconstructed, double eps_abs,
                                         int threads = 0)
{
  if (!(original.shape == reconstructed.shape)) {
    throw error(errc::shape_mismatch, "original and reconstruction differ in shape");
  }
  const std::span<const T> a(original.values), b(reconstructed.values);
  VerificationReport r;
  r.vertices = original.size();
  r.eps_abs = eps_abs;
  r.max_abs_error = max_abs_error(a, b);
  r.bound_ok = r.max_abs_error <= eps_abs;
  r.order_violations = check_local_order(original, reconstructed, threads);
  const CriticalPointReport cp = diff_critical(original, reconstructed, threads);
  r.original_counts = CriticalCounts::tally(cp.original);
  r.reconstructed_counts = CriticalCounts::tally(cp.reconstructed);
  r.false_positives = cp.false_positives;
  r.false_negatives = cp.false_negatives;
  r.false_types = cp.false_types;
  try {
    r.psnr = psnr(a, b);
  } catch (const error&) {
    r.psnr = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

namespace detail {

// JSON has no infinities; they are written as the strings "inf" / "nan".
inline nlohmann::json json_number(double v)
{
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

inline nlohmann::json json_counts(const CriticalCounts& c)
{
  return {{"minima", c.minima}, {"maxima", c.maxima}, {"saddles", c.saddles}};
}

}  // namespace detail

inline nlohmann::json to_json(const VerificationReport& r)
{
  return {
      {"vertices", r.vertices},
      {"eps_abs", detail::json_number(r.eps_abs)},
      {"max_abs_error", detail::json_number(r.max_abs_error)},
      {"bound_ok", r.bound_ok},
      {"local_order_violations", r.order_violations},
      {"critical_points_original", detail::json_counts(r.original_counts)},
      {"critical_points_reconstructed", detail::json_counts(r.reconstructed_counts)},
      {"false_positives", r.false_positives},
      {"false_negatives", r.false_negatives},
      {"false_types", r.false_types},
      {"psnr", detail::json_number(r.psnr)},
      {"passed", r.passed()},
  };
}

inline std::string csv_header()
{
  return "vertices,eps_abs,max_abs_error,bound_ok,local_order_violations,"
         "orig_minima,orig_maxima,orig_saddles,recon_minima,recon_maxima,recon_saddles,"
         "false_positives,false_negatives,false_types,psnr,passed";
}

inline std::string to_csv_row(const VerificationReport& r)
{
  std::ostringstream s;
  s.precision(17);
  s << r.vertices << ',' << r.eps_abs << ',' << r.max_abs_error << ',' << r.bound_ok << ','
    << r.order_violations << ',' << r.original_counts.minima << ','
    << r.original_counts.maxima << ',' << r.original_counts.saddles << ','
    << r.reconstructed_counts.minima << ',' << r.reconstructed_counts.maxima << ','
    << r.reconstructed_counts.saddles << ',' << r.false_positives << ','
    << r.false_negatives << ',' << r.false_types << ',';
  if (std::isinf(r.psnr)) {
    s << "inf";
  } else {
    s << r.psnr;
  }
  s << ',' << r.passed();
  return s.str();
}

}  // namespace lopc

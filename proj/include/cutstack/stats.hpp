#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "cutstack/process.hpp"

namespace cutstack {

// Occurrences of x in bits (overlapping), brute force.
std::size_t count_window(std::string_view bits, std::string_view x);

// count / (|bits| - |x| + 1); normalized by the number of windows.
mpq_class empirical_freq(std::string_view bits, std::string_view x);

struct ConfidenceInterval {
  double lo = 0;
  double hi = 1;
};

// Wilson score interval for `hits` out of `trials` at z standard deviations.
ConfidenceInterval wilson(std::uint64_t hits, std::uint64_t trials, double z);

struct CurvePoint {
  std::uint64_t length = 0;
  std::uint64_t deviations = 0;
  std::uint64_t trials = 0;
  double fraction = 0;
  ConfidenceInterval ci;
};

struct RateCurveConfig {
  std::string x;
  std::uint64_t k = 2;
  std::vector<std::uint64_t> lengths;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  // Start points are drawn from S(C_sample_stage); default as in sample_orbit.
  std::optional<std::size_t> sample_stage;
  double z = 3.0;
  unsigned jobs = 1;
};

// Per length n: fraction of trials whose empirical frequency of x on the
// first n symbols lies at distance >= 1/k from every value in `truth`.
// Trial t uses orbit seed (seed + t).
std::vector<CurvePoint> rate_curve(const Process& p, const Enclosure& truth,
                                   const RateCurveConfig& cfg);

// length,deviation_fraction,ci_lo,ci_hi
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace cutstack

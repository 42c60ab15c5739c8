#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cutstack/dyadic.hpp"

// Reference implementations for tests: flat interval lists over rationals,
// built by the literal left-half/right-half cutting and stacking rule, and
// brute-force string scans.
namespace oracle {

using Interval = std::pair<mpq_class, mpq_class>;  // [lo, hi)

struct FlatColumn {
  std::vector<Interval> levels;

  std::size_t height() const { return levels.size(); }
  mpq_class width() const { return levels.front().second - levels.front().first; }
  std::string label() const;  // '0' below 1/2, '1' above
};

FlatColumn base(const mpq_class& lo, const mpq_class& hi);
FlatColumn stack(const FlatColumn& a, const FlatColumn& b);
// One cut: left halves of every level, then the right halves on top.
FlatColumn cut_and_stack(const FlatColumn& c);
FlatColumn doubled(FlatColumn c, unsigned n);

// C_0..C_n of the slow-rate construction, built flat.
std::vector<FlatColumn> theorem2_stages(const std::vector<std::uint64_t>& k, std::size_t n);

// 1-based level containing p, 0 if none.
std::size_t locate(const FlatColumn& c, const mpq_class& p);

std::size_t count(const std::string& s, const std::string& pattern);

// Measure of B_0 ∩ ... ∩ B_n, computed geometrically on flat stages.
mpq_class b_intersection(const std::vector<FlatColumn>& stages,
                         const std::vector<std::uint64_t>& k, std::size_t n);

// Union of the given levels as merged intervals.
std::vector<Interval> union_of(const std::vector<Interval>& ivs);
std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b);
mpq_class measure(const std::vector<Interval>& s);

mpq_class q(const cutstack::Dyadic& d);

}  // namespace oracle

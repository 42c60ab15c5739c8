#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutstack/column.hpp"
#include "cutstack/serialize.hpp"

namespace cutstack {

// Finite unions of half-open intervals, sorted and merged.
using IntervalSet = std::vector<DyadicInterval>;

IntervalSet make_set(std::vector<DyadicInterval> ivs);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);
Dyadic set_measure(const IntervalSet& s);

// For C of height h and its doubling C(k): (union of L_j, j in J) intersected
// with levels b*h+1..(b+1)*h of C(k) equals the union of the shifted levels
// j+b*h, with measure 2^-k of the original. Levels are 1-based.
bool lemma2_holds(const Column& c, const std::vector<std::uint64_t>& J, std::uint64_t k,
                  std::uint64_t block);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::size_t lemma2_instances = 20;
  std::uint64_t seed = 1;
  std::optional<std::string> rate;  // adds slow-rate certificates
  std::vector<FalsificationWitness> extra_witnesses;  // e.g. from a witness file
  std::optional<StageTrace> recorded_trace;           // compared with the rebuilt one
};

std::vector<CheckResult> run_verification(const LoadedProcess& lp, const VerifyOptions& opt);

}  // namespace cutstack

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "cutstack/column.hpp"
#include "cutstack/dyadic.hpp"

namespace cutstack {

enum class ProcessKind { theorem2, adversary };

const char* to_string(ProcessKind kind);

// One-sided orbit xi(0) xi(1) ... of a uniformly drawn start point.
struct OrbitSample {
  std::uint64_t seed = 0;
  Dyadic start;
  std::string bits;
  std::size_t stage_used = 0;     // stage whose label produced the bits
  std::size_t sampled_stage = 0;  // start point drawn uniformly from S(C_sampled_stage)
  // Total-variation distance to the unconditioned process on the first
  // |bits| coordinates is at most 1 - lambda(S(C_sampled_stage)).
  Dyadic tv_bound;
};

struct Enclosure {
  std::string x;
  Dyadic lo;
  Dyadic hi;
  std::size_t stage = 0;

  Dyadic width() const { return hi - lo; }
  bool contains(const Dyadic& v) const { return lo <= v && v <= hi; }
};

// Executable (T, X^0, X^1) process given by an extending column sequence
// C_0, ..., C_N with w(C_n) = 2^(-k_n). Immutable after construction.
class Process {
 public:
  Process(ProcessKind kind, std::vector<std::uint64_t> k, std::vector<Column> stages);

  ProcessKind kind() const { return kind_; }
  std::size_t last_stage() const { return stages_.size() - 1; }
  const std::vector<std::uint64_t>& k_sequence() const { return k_; }
  std::uint64_t k(std::size_t n) const { return k_.at(n); }

  const Column& stage(std::size_t n) const;
  const Dyadic& width(std::size_t n) const { return stage(n).width(); }
  const mpz_class& height(std::size_t n) const { return stage(n).height(); }
  const Dyadic& support_measure(std::size_t n) const { return stage(n).support_measure(); }
  const LabelString& label(std::size_t n) const { return stage(n).label(); }

  // Level of C_n containing xi, or nullopt outside S(C_n).
  std::optional<Location> locate(const Dyadic& xi, std::size_t n) const;

  // First len symbols of the one-sided orbit of xi. Throws
  // InsufficientStages when no built stage has enough levels above xi.
  std::string emit_symbols(const Dyadic& xi, std::size_t len) const;
  // Same, also reporting the stage whose label was read.
  std::string emit_symbols(const Dyadic& xi, std::size_t len, std::size_t& stage_used) const;

  // Start point uniform on S(C_s) with s = sample_stage. The default is the
  // stage below the last, so the whole A-part of the last stage lies above
  // every start level.
  OrbitSample sample_orbit(std::uint64_t seed, std::size_t len,
                           std::optional<std::size_t> sample_stage = std::nullopt) const;
  Dyadic draw_start(std::uint64_t seed, std::size_t sample_stage) const;
  std::size_t default_sample_stage() const;

  // P_n(x) = (#occurrences of x in s(C_n)) * w(C_n); P_n(empty) = lambda(S(C_n)).
  Dyadic block_prob(std::size_t n, std::string_view x,
                    std::size_t pattern_cap = kDefaultPatternCap) const;

  // [P_n(x), P_n(x) + (1 - lambda(S(C_n))) + (|x|-1) w(C_n)] for the first
  // stage n whose width is at most eps.
  Enclosure block_prob_limit(std::string_view x, const Dyadic& eps,
                             std::size_t pattern_cap = kDefaultPatternCap) const;
  Enclosure enclosure_at(std::string_view x, std::size_t n,
                         std::size_t pattern_cap = kDefaultPatternCap) const;

  // k_n / h(C_n) per stage.
  std::vector<mpq_class> entropy_profile() const;

 private:
  ProcessKind kind_;
  std::vector<std::uint64_t> k_;
  std::vector<Column> stages_;
};

// Start points are drawn with k_s + kExtraStartBits random bits; more than
// kMaxStartBits is refused.
inline constexpr std::uint64_t kExtraStartBits = 32;
inline constexpr std::uint64_t kMaxStartBits = 256;

}  // namespace cutstack

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace cutstack {

inline constexpr std::size_t kDefaultPatternCap = 64;
inline constexpr std::uint64_t kMaterializeLimit = std::uint64_t{1} << 20;

// Binary string held as a straight-line grammar: single-symbol leaves,
// repetition nodes with arbitrary-precision counts, and concatenations.
// The strings labelling tall columns are never expanded; occurrence counts
// are computed per node from (|pattern|-1)-character fringes and memoized.
class LabelString {
 public:
  static LabelString leaf(char symbol);
  static LabelString power(LabelString base, mpz_class times);
  static LabelString concat(std::vector<LabelString> parts);
  // Literal string as a flat concatenation of leaves; test and tooling helper.
  static LabelString literal(std::string_view s);

  const mpz_class& length() const;

  // Occurrences of pattern starting at 1 <= i <= length - |pattern| + 1.
  mpz_class count_occurrences(std::string_view pattern,
                              std::size_t pattern_cap = kDefaultPatternCap) const;

  // s_start .. s_{start+len-1}, start is 1-based.
  std::string extract(const mpz_class& start, std::size_t len) const;

  // Full expansion; throws BudgetError above `limit` symbols.
  std::string materialize(std::uint64_t limit = kMaterializeLimit) const;

  std::uint64_t node_id() const;

  struct Node;

 private:
  explicit LabelString(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace cutstack

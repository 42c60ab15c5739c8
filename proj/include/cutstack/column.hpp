#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "cutstack/dyadic.hpp"
#include "cutstack/label.hpp"

namespace cutstack {

// X^0 = [0, 1/2) and X^1 = [1/2, 1); symbol of a base slab lying in one of them.
std::optional<char> symbol_class(const DyadicInterval& iv);

// Index reversal of the n low bits of j (j < 2^n).
mpz_class bit_reverse(const mpz_class& j, std::uint64_t n);

struct Location {
  mpz_class level;  // 1-based
  DyadicInterval interval;
};

// Ordered stack of equal-width disjoint dyadic intervals, held as an
// expression DAG over base slabs, self-doublings C(n) and concatenations.
// Width, height, support measure, support and label are computed once at
// construction; nothing is expanded level by level unless materialize() is
// called.
class Column {
 public:
  enum class Kind { base, doubled, stacked };

  static Column base(DyadicInterval slab);
  // C(n): C(0) = C, C(j+1) = C(j) * C(j).
  static Column doubled(Column c, std::uint64_t n);
  // C * C'; parts must share a width and have pairwise disjoint supports.
  static Column stack(std::vector<Column> parts);
  static Column stack(Column a, Column b);

  Kind kind() const;
  const Dyadic& width() const;
  const mpz_class& height() const;
  const Dyadic& support_measure() const;
  // Merged, sorted, pairwise disjoint intervals covering S(C).
  const std::vector<DyadicInterval>& support() const;
  bool support_contains(const Dyadic& p) const;

  bool compatible() const;
  // s(C); throws PreconditionError for an incompatible column.
  const LabelString& label() const;

  // Expression accessors.
  const DyadicInterval& slab() const;           // base
  const Column& child() const;                  // doubled
  std::uint64_t times() const;                  // doubled
  const std::vector<Column>& parts() const;     // stacked

  std::optional<Location> locate(const Dyadic& p) const;
  DyadicInterval level_interval(const mpz_class& level) const;

  // Levels L_1..L_h; throws BudgetError above `limit`.
  std::vector<DyadicInterval> materialize(std::uint64_t limit = kMaterializeLimit) const;

  std::uint64_t id() const;

  struct Node;

 private:
  explicit Column(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace cutstack

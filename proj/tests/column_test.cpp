#include <random>

#include <gtest/gtest.h>

#include "cutstack/column.hpp"
#include "cutstack/error.hpp"
#include "cutstack/slowrate.hpp"
#include "cutstack/verify.hpp"
#include "oracles.hpp"

using namespace cutstack;

namespace {

Dyadic d(long m, std::uint64_t e) { return Dyadic(mpz_class(m), e); }

std::vector<oracle::Interval> as_rational(const std::vector<DyadicInterval>& levels) {
  std::vector<oracle::Interval> out;
  for (const auto& iv : levels) out.emplace_back(iv.lower().to_mpq(), iv.upper().to_mpq());
  return out;
}

// Random compatible column with its flat twin: slabs inside X^0 / X^1
// on disjoint dyadic cells, doubled and stacked.
struct Pair {
  Column c;
  oracle::FlatColumn f;
};

Pair random_column(std::mt19937_64& rng) {
  // Slabs: cells of width 2^-4 at distinct positions; each doubled so that
  // all reach width 2^-6 before stacking.
  std::vector<int> cells(16);
  for (int i = 0; i < 16; ++i) cells[i] = i;
  std::shuffle(cells.begin(), cells.end(), rng);
  const int parts = 1 + static_cast<int>(rng() % 3);
  std::vector<Column> cs;
  oracle::FlatColumn f;
  for (int p = 0; p < parts; ++p) {
    const DyadicInterval slab(d(cells[p], 4), d(cells[p] + 1, 4));
    const unsigned t = 2;
    cs.push_back(Column::doubled(Column::base(slab), t));
    auto flat = oracle::doubled(oracle::base(mpq_class(cells[p], 16), mpq_class(cells[p] + 1, 16)), t);
    f = p == 0 ? flat : oracle::stack(f, flat);
  }
  Column c = Column::stack(cs);
  const unsigned extra = static_cast<unsigned>(rng() % 3);
  return {Column::doubled(c, extra), oracle::doubled(f, extra)};
}

}  // namespace

TEST(Column, DoubleExamples) {
  const Column x1 = Column::base(x1_interval());
  EXPECT_EQ(Column::doubled(x1, 0).id(), x1.id());
  const Column c = Column::doubled(x1, 1);
  EXPECT_EQ(c.width(), Dyadic::pow2_neg(2));
  EXPECT_EQ(c.height(), 2);
  EXPECT_EQ(c.label().materialize(), "11");
  EXPECT_EQ(c.support_measure(), Dyadic::pow2_neg(1));
}

TEST(Column, DoubleThreeTimes) {
  const Column a = Column::base(a_interval(1));
  const Column c = Column::stack(Column::doubled(Column::base(x1_interval()), 1), a);
  const Column c3 = Column::doubled(c, 3);
  EXPECT_EQ(c3.support_measure(), c.support_measure());
  std::string expect;
  for (int i = 0; i < 8; ++i) expect += c.label().materialize();
  EXPECT_EQ(c3.label().materialize(), expect);
  EXPECT_EQ(c3.width(), c.width() * Dyadic::pow2_neg(3));
  EXPECT_EQ(c3.height(), 8 * c.height());
}

TEST(Column, StackPreconditions) {
  const Column x1 = Column::base(x1_interval());
  const Column a1 = Column::base(a_interval(1));
  EXPECT_THROW(Column::stack(x1, a1), PreconditionError);
  EXPECT_NO_THROW(Column::stack(Column::doubled(x1, 1), a1));
  EXPECT_THROW(Column::stack(Column::doubled(x1, 1), Column::doubled(x1, 1)),
               PreconditionError);
  const Column s = Column::stack(Column::doubled(x1, 1), a1);
  EXPECT_EQ(s.height(), 3);
  EXPECT_EQ(s.support_measure(), d(3, 2));
  EXPECT_EQ(s.label().materialize(), "110");
}

TEST(Column, IncompatibleSlabHasNoLabel) {
  const Column c = Column::base(DyadicInterval(d(1, 2), d(3, 2)));
  EXPECT_FALSE(c.compatible());
  EXPECT_THROW(c.label(), PreconditionError);
}

TEST(Column, MaterializeMatchesCuttingAndStacking) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const Pair p = random_column(rng);
    const auto levels = p.c.materialize();
    ASSERT_EQ(as_rational(levels), p.f.levels);
    EXPECT_EQ(p.c.label().materialize(), p.f.label());
    EXPECT_EQ(p.c.width() * p.c.height(), p.c.support_measure());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      EXPECT_EQ(p.c.level_interval(mpz_class(static_cast<unsigned long>(i + 1))), levels[i]);
    }
  }
}

TEST(Column, Theorem2StagesMatchFlatConstruction) {
  const std::vector<std::uint64_t> k{1, 2, 4, 7, 9};
  const auto flat = oracle::theorem2_stages(k, 4);
  const Process p = build_theorem2(KSequence(k), 4);
  for (std::size_t n = 0; n <= 4; ++n) {
    EXPECT_EQ(as_rational(p.stage(n).materialize()), flat[n].levels) << n;
    EXPECT_EQ(p.label(n).materialize(), flat[n].label());
  }
}

TEST(Column, LocateMatchesScan) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 40; ++t) {
    const Pair p = random_column(rng);
    for (int s = 0; s < 50; ++s) {
      const Dyadic x(mpz_class(static_cast<unsigned long>(rng() % 4096)), 12);
      const std::size_t want = oracle::locate(p.f, x.to_mpq());
      const auto got = p.c.locate(x);
      if (want == 0) {
        EXPECT_FALSE(got.has_value());
        EXPECT_FALSE(p.c.support_contains(x));
      } else {
        ASSERT_TRUE(got.has_value());
        EXPECT_EQ(got->level, want);
        EXPECT_EQ(got->interval.lower().to_mpq(), p.f.levels[want - 1].first);
      }
    }
  }
}

TEST(Column, BitReverse) {
  EXPECT_EQ(bit_reverse(1, 3), 4);
  EXPECT_EQ(bit_reverse(6, 3), 3);
  EXPECT_EQ(bit_reverse(0, 5), 0);
  EXPECT_EQ(bit_reverse(1, 1), 1);
}

// Doubling by k: the chosen levels intersected with copy b are exactly the
// shifted levels, carrying 2^-k of the measure.
TEST(Column, DoublingShiftAndScale) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const Pair p = random_column(rng);
    const std::uint64_t k = rng() % 4;
    const Column dk = Column::doubled(p.c, k);
    const auto levels = p.c.materialize();
    const auto dlevels = as_rational(dk.materialize());
    const std::uint64_t h = levels.size();
    const std::uint64_t block = rng() % (std::uint64_t{1} << k);
    std::vector<std::uint64_t> J;
    for (std::uint64_t j = 1; j <= h; ++j) {
      if (rng() % 2) J.push_back(j);
    }
    if (J.empty()) J.push_back(1);
    std::vector<oracle::Interval> chosen, shifted;
    for (auto j : J) {
      chosen.emplace_back(levels[j - 1].lower().to_mpq(), levels[j - 1].upper().to_mpq());
      shifted.push_back(dlevels[j + block * h - 1]);
    }
    std::vector<oracle::Interval> blk(dlevels.begin() + block * h,
                                      dlevels.begin() + (block + 1) * h);
    const auto lhs = oracle::intersect(oracle::union_of(chosen), oracle::union_of(blk));
    EXPECT_EQ(lhs, oracle::union_of(shifted));
    mpq_class scale(1, 1);
    scale /= mpz_class(1) << k;
    EXPECT_EQ(oracle::measure(lhs), oracle::measure(oracle::union_of(chosen)) * scale);
    EXPECT_TRUE(lemma2_holds(p.c, J, k, block));
  }
}

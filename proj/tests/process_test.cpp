#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cutstack/error.hpp"
#include "cutstack/slowrate.hpp"
#include "oracles.hpp"

using namespace cutstack;

namespace {

Dyadic d(long m, std::uint64_t e) { return Dyadic(mpz_class(m), e); }

const Process& p123() {
  static const Process p = build_theorem2(KSequence({1, 2, 3}), 2);
  return p;
}

const Process& deep() {
  static const Process p = build_theorem2(KSequence({1, 2, 3, 4, 5, 6, 7}), 6);
  return p;
}

std::vector<std::string> all_blocks(std::size_t len) {
  std::vector<std::string> out;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
    std::string x;
    for (std::size_t b = len; b-- > 0;) x.push_back(((v >> b) & 1) ? '1' : '0');
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(Process, LocateExamples) {
  const auto loc = p123().locate(d(3, 2), 0);
  ASSERT_TRUE(loc);
  EXPECT_EQ(loc->level, 1);
  EXPECT_FALSE(p123().locate(d(1, 3), 1).has_value());
  const auto flat = oracle::theorem2_stages({1, 2, 3}, 2);
  const Dyadic xi = d(9, 4);
  EXPECT_EQ(p123().locate(xi, 2)->level, oracle::locate(flat[2], xi.to_mpq()));
  EXPECT_THROW(p123().locate(Dyadic(1), 0), PreconditionError);
  EXPECT_THROW(p123().locate(d(1, 1), 3), PreconditionError);
}

TEST(Process, EmitExamples) {
  const Process p = build_theorem2(KSequence({1, 2, 3, 4}), 3);
  // A point on level 1 of C_2.
  const Dyadic bottom = p.stage(2).level_interval(1).lower();
  EXPECT_EQ(p.emit_symbols(bottom, 7), "1101100");
  EXPECT_EQ(p.emit_symbols(bottom, 0), "");
  // Level 5 of C_2 needs stage 3 for 5 symbols.
  const Dyadic mid = p.stage(2).level_interval(5).lower();
  std::size_t used = 0;
  const std::string got = p.emit_symbols(mid, 5, used);
  EXPECT_EQ(used, 3u);
  const auto flat = oracle::theorem2_stages({1, 2, 3, 4}, 3);
  const std::size_t level = oracle::locate(flat[3], mid.to_mpq());
  EXPECT_EQ(got, flat[3].label().substr(level - 1, 5));
  EXPECT_THROW(p.emit_symbols(mid, 30), InsufficientStages);
  EXPECT_THROW(p.emit_symbols(d(1, 5), 1), PreconditionError);
}

TEST(Process, EmitMatchesIteratedMap) {
  // Reading labels equals walking up the flat column level by level.
  const std::vector<std::uint64_t> k{1, 2, 4, 7};
  const Process p = build_theorem2(KSequence(k), 3);
  const auto flat = oracle::theorem2_stages(k, 3);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const Dyadic xi(mpz_class(static_cast<unsigned long>(rng() % (1u << 12))), 12);
    std::size_t n = 0;
    while (n <= 3 && oracle::locate(flat[n], xi.to_mpq()) == 0) ++n;
    if (n > 3) continue;
    const std::size_t level = oracle::locate(flat[3], xi.to_mpq());
    const std::size_t room = flat[3].height() - level + 1;
    const std::size_t len = 1 + rng() % std::min<std::size_t>(room, 40);
    EXPECT_EQ(p.emit_symbols(xi, len), flat[3].label().substr(level - 1, len));
  }
}

TEST(Process, EmitIsPrefixStable) {
  const Process p = build_theorem2(KSequence::gap_sequence(6), 6);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Dyadic xi = p.draw_start(rng(), 5);
    const std::string longer = p.emit_symbols(xi, 90);
    for (std::size_t len : {1, 5, 33, 89}) EXPECT_EQ(p.emit_symbols(xi, len), longer.substr(0, len));
  }
}

TEST(Process, SampleDeterministic) {
  const auto a = deep().sample_orbit(42, 50);
  const auto b = deep().sample_orbit(42, 50);
  EXPECT_EQ(a.bits, b.bits);
  EXPECT_EQ(a.start, b.start);
  EXPECT_EQ(a.sampled_stage, 5u);
  EXPECT_EQ(a.tv_bound, Dyadic::pow2_neg(6));
  EXPECT_THROW(deep().sample_orbit(1, 0), PreconditionError);
}

TEST(Process, SampledPairFrequency) {
  // Start points from S(C_5): P("11") = 1/4 exactly, up to TV 2^-6.
  const int trials = 100000;
  int hits = 0;
  for (int s = 0; s < trials; ++s) hits += deep().sample_orbit(s, 2).bits == "11";
  const double f = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(0.25 * 0.75 / trials);
  EXPECT_NEAR(f, 0.25, 3 * sigma + 1.0 / 64);
}

TEST(Process, BlockProbExamples) {
  EXPECT_EQ(p123().block_prob(2, "11"), d(1, 2));
  EXPECT_EQ(p123().block_prob(2, ""), d(7, 3));
  EXPECT_EQ(p123().block_prob(2, "1001"), Dyadic(0));
  const Process p = build_theorem2(KSequence({1, 2, 3, 4}), 3);
  EXPECT_GT(p.block_prob(3, "1001"), Dyadic(0));
  const auto flat = oracle::theorem2_stages({1, 2, 3, 4}, 3);
  EXPECT_EQ(p.block_prob(3, "1001").to_mpq(),
            mpq_class(oracle::count(flat[3].label(), "1001"), 16));
  EXPECT_THROW(p.block_prob(3, std::string(65, '0')), PreconditionError);
}

TEST(Process, BlockProbMatchesMaterializedCounts) {
  const std::vector<std::uint64_t> k{1, 3, 5, 8};
  const Process p = build_theorem2(KSequence(k), 3);
  const auto flat = oracle::theorem2_stages(k, 3);
  for (std::size_t n = 0; n <= 3; ++n) {
    const std::string s = flat[n].label();
    for (std::size_t len = 1; len <= 5; ++len) {
      for (const auto& x : all_blocks(len)) {
        EXPECT_EQ(p.block_prob(n, x).to_mpq(), oracle::count(s, x) * flat[n].width());
      }
    }
  }
}

TEST(Process, MonotoneAndSplitting) {
  for (std::size_t len = 1; len <= 5; ++len) {
    for (const auto& x : all_blocks(len)) {
      for (std::size_t n = 0; n <= 6; ++n) {
        const Dyadic pn = deep().block_prob(n, x);
        if (n < 6) EXPECT_LE(pn, deep().block_prob(n + 1, x));
        EXPECT_GE(pn, deep().block_prob(n, x + "0") + deep().block_prob(n, x + "1"));
      }
    }
  }
}

TEST(Process, BlockMassDeficit) {
  for (std::size_t n = 0; n <= 6; ++n) {
    for (std::size_t len = 1; len <= 6; ++len) {
      if (deep().height(n) < len) continue;
      Dyadic total(0);
      for (const auto& x : all_blocks(len)) total += deep().block_prob(n, x);
      EXPECT_EQ(total, deep().support_measure(n) -
                           deep().width(n) * mpz_class(static_cast<unsigned long>(len - 1)));
    }
  }
}

TEST(Process, TailBoundAgainstDeeperStage) {
  const Process p = build_theorem2(KSequence::gap_sequence(9), 9);
  for (std::size_t len = 1; len <= 4; ++len) {
    for (const auto& x : all_blocks(len)) {
      for (std::size_t n = 0; n + 5 <= 9; ++n) {
        const Enclosure e = p.enclosure_at(x, n);
        EXPECT_TRUE(e.contains(p.block_prob(n + 5, x))) << x << " " << n;
      }
    }
  }
}

TEST(Process, LimitEnclosureExamples) {
  const Process p = build_theorem2(KSequence::gap_sequence(10), 10);
  const KSequence k = KSequence::gap_sequence(10);
  const Enclosure e = p.block_prob_limit("0110", Dyadic::pow2_neg(8));
  EXPECT_TRUE(e.contains(Dyadic::pow2_neg(k[1])));
  EXPECT_LE(e.width(), Dyadic::pow2_neg(8));
  const Process q = build_theorem2(KSequence({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}), 10);
  const Enclosure f = q.block_prob_limit("101", Dyadic::pow2_neg(9));
  EXPECT_TRUE(f.contains(Dyadic::pow2_neg(3)));
  EXPECT_FALSE(f.contains(Dyadic::pow2_neg(2)));
  Dyadic last = Dyadic(2);
  for (std::size_t n = 0; n <= 10; ++n) {
    const Dyadic w = p.enclosure_at("0110", n).width();
    EXPECT_LE(w, last);
    last = w;
  }
  EXPECT_THROW(p.block_prob_limit("11", Dyadic::pow2_neg(30)), BudgetError);
  EXPECT_THROW(p.block_prob_limit("11", Dyadic(0)), PreconditionError);
}

TEST(Process, EntropyProfile) {
  EXPECT_EQ(p123().entropy_profile()[2], mpq_class(3, 7));
  const Process p = build_theorem2(KSequence::gap_sequence(10), 10);
  const auto prof = p.entropy_profile();
  for (std::size_t n = 0; n < prof.size(); ++n) {
    mpq_class cap(mpz_class(static_cast<unsigned long>(p.k(n))), mpz_class(1) << (p.k(n) - 1));
    EXPECT_LE(prof[n], cap);
    EXPECT_GT(prof[n], 0);
    if (n) EXPECT_LT(prof[n], prof[n - 1]);
  }
}

TEST(Process, RejectsNonExtendingStages) {
  const Column x1 = Column::base(x1_interval());
  EXPECT_THROW(Process(ProcessKind::theorem2, {1, 1}, {x1, x1}), PreconditionError);
  EXPECT_THROW(Process(ProcessKind::theorem2, {2}, {x1}), PreconditionError);
}

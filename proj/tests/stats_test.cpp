#include <sstream>

#include <gtest/gtest.h>

#include "cutstack/error.hpp"
#include "cutstack/slowrate.hpp"
#include "cutstack/stats.hpp"
#include "oracles.hpp"

using namespace cutstack;

TEST(Stats, CountAndFrequency) {
  EXPECT_EQ(count_window("1111", "11"), 3u);
  EXPECT_EQ(count_window("10101", "101"), 2u);
  EXPECT_EQ(count_window("1", "11"), 0u);
  EXPECT_EQ(empirical_freq("0110", "1"), mpq_class(1, 2));
  EXPECT_EQ(empirical_freq("0110", "11"), mpq_class(1, 3));
  EXPECT_THROW(empirical_freq("0", "00"), PreconditionError);
  EXPECT_THROW(empirical_freq("0", ""), PreconditionError);
  EXPECT_EQ(count_window("0011011100", "0"), oracle::count("0011011100", "0"));
}

TEST(Stats, Wilson) {
  // Reference values for 20/100 at z = 1.96.
  const auto ci = wilson(20, 100, 1.96);
  EXPECT_NEAR(ci.lo, 0.1334, 1e-4);
  EXPECT_NEAR(ci.hi, 0.2888, 1e-4);
  const auto zero = wilson(0, 50, 3);
  EXPECT_EQ(zero.lo, 0);
  EXPECT_GT(zero.hi, 0);
  const auto all = wilson(50, 50, 3);
  EXPECT_LT(all.lo, 1);
  EXPECT_EQ(all.hi, 1);
}

TEST(Stats, RateCurveCountsByHand) {
  const Process p = build_theorem2(KSequence::gap_sequence(6), 6);
  RateCurveConfig cfg;
  cfg.x = "1";
  cfg.k = 4;
  cfg.lengths = {4, 64};
  cfg.trials = 200;
  cfg.seed = 77;
  Enclosure truth{"1", Dyadic::pow2_neg(1), Dyadic::pow2_neg(1), 0};
  const auto curve = rate_curve(p, truth, cfg);
  ASSERT_EQ(curve.size(), 2u);
  for (const auto& pt : curve) {
    std::uint64_t dev = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      const auto o = p.sample_orbit(cfg.seed + t, pt.length);
      const mpq_class f = empirical_freq(o.bits, "1");
      if (abs(f - mpq_class(1, 2)) >= mpq_class(1, 4)) ++dev;
    }
    EXPECT_EQ(pt.deviations, dev) << pt.length;
    EXPECT_EQ(pt.trials, cfg.trials);
    EXPECT_LE(pt.ci.lo, pt.fraction);
    EXPECT_GE(pt.ci.hi, pt.fraction);
  }
  cfg.jobs = 3;
  const auto par = rate_curve(p, truth, cfg);
  for (std::size_t i = 0; i < curve.size(); ++i) EXPECT_EQ(par[i].deviations, curve[i].deviations);
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "length,deviation_fraction,ci_lo,ci_hi");
}

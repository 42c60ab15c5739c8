#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cutstack/error.hpp"
#include "cutstack/ryabko.hpp"

using namespace cutstack;

namespace {

RyabkoSpec spec3(RyabkoSpec::Overflow o = RyabkoSpec::Overflow::repeat_last) {
  return RyabkoSpec{{mpq_class(1, 2), mpq_class(1, 3), mpq_class(1, 4)}, o};
}

std::vector<std::size_t> naive_Ij(const std::string& s, std::size_t j) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + j <= s.size(); ++i) {
    if (s[i - 1] != '0') continue;
    bool ok = true;
    for (std::size_t t = i + 1; t <= i + j; ++t) ok = ok && s[t - 1] != '0';
    if (ok) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(Ryabko, Validation) {
  EXPECT_THROW(RyabkoSpec{}.validate(), PreconditionError);
  EXPECT_THROW((RyabkoSpec{{mpq_class(3, 2)}}.validate()), PreconditionError);
  EXPECT_THROW((RyabkoSpec{{mpq_class(-1, 2)}}.validate()), PreconditionError);
  EXPECT_NO_THROW(spec3().validate());
  EXPECT_EQ(spec3().at(7), mpq_class(1, 4));
  EXPECT_THROW(spec3(RyabkoSpec::Overflow::fail).at(4), BudgetError);
  EXPECT_THROW(sample_ryabko(spec3(), 1, 0), PreconditionError);
}

TEST(Ryabko, SampleShape) {
  const std::string s = sample_ryabko(spec3(), 5, 2000);
  EXPECT_EQ(s, sample_ryabko(spec3(), 5, 2000));
  EXPECT_EQ(s[0], '0');
  EXPECT_EQ(s.find_first_not_of("012"), std::string::npos);
  // Stationary P(Y = 0) = 1/2.
  const std::string big = sample_ryabko(spec3(), 6, 200000);
  const double zeros = static_cast<double>(std::count(big.begin(), big.end(), '0')) / big.size();
  EXPECT_NEAR(zeros, 0.5, 0.01);
}

TEST(Ryabko, FailPolicyStopsAtUnknownState) {
  const RyabkoSpec s{{mpq_class(1, 2)}, RyabkoSpec::Overflow::fail};
  bool threw = false;
  for (std::uint64_t seed = 0; seed < 20 && !threw; ++seed) {
    try {
      const std::string out = sample_ryabko(s, seed, 200);
      // Without a throw, every nonzero run has length 1.
      for (std::size_t i = 1; i < out.size(); ++i) {
        EXPECT_FALSE(out[i] != '0' && out[i - 1] != '0');
      }
    } catch (const BudgetError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

TEST(Ryabko, ExtractMatchesNaive) {
  EXPECT_EQ(extract_Ij("0120", 1), (std::vector<std::size_t>{1}));
  EXPECT_EQ(extract_Ij("0120", 2), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(extract_Ij("0120", 3).empty());
  EXPECT_EQ(extract_Ij("00", 1), std::vector<std::size_t>{});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    std::string s;
    const std::size_t n = rng() % 40;
    for (std::size_t i = 0; i < n; ++i) s.push_back("012"[rng() % 3]);
    for (std::size_t j = 1; j <= 5; ++j) EXPECT_EQ(extract_Ij(s, j), naive_Ij(s, j));
  }
}

TEST(Ryabko, SampleSize) {
  for (std::uint64_t k : {1, 2, 8, 100}) {
    const double want = std::ceil(2.0 * k * k * std::log(20.0 * k));
    EXPECT_EQ(ryabko_sample_size(k), static_cast<std::uint64_t>(want));
  }
  EXPECT_EQ(ryabko_sample_size(8), 650u);
  EXPECT_THROW(ryabko_sample_size(0), PreconditionError);
}

TEST(Ryabko, EstimateFreezes) {
  const std::string s = sample_ryabko(spec3(), 9, 60000);
  const auto est = estimate_pj(s, 2, 8);
  ASSERT_TRUE(est.value.has_value());
  EXPECT_EQ(est.samples_seen, 650u);
  // Same value on the shortest fixing prefix and on any longer one.
  const auto shorter = estimate_pj(std::string_view(s).substr(0, est.prefix_used), 2, 8);
  ASSERT_TRUE(shorter.value.has_value());
  EXPECT_EQ(*shorter.value, *est.value);
  EXPECT_FALSE(estimate_pj(std::string_view(s).substr(0, est.prefix_used - 1), 2, 8).value);
  // Independent count on the first 650 indices.
  const auto idx = extract_Ij(s, 2);
  std::size_t ones = 0;
  for (std::size_t t = 0; t < 650; ++t) ones += s[idx[t] + 2 - 1] == '1';
  EXPECT_EQ(*est.value, mpq_class(ones, 650));
  EXPECT_NEAR(est.value->get_d(), 1.0 / 3, 1.0 / 8);
  EXPECT_THROW(estimate_pj(s, 0, 8), PreconditionError);
}

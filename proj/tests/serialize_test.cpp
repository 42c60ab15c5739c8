#include <gtest/gtest.h>

#include "cutstack/error.hpp"
#include "cutstack/serialize.hpp"
#include "cutstack/verify.hpp"

using namespace cutstack;

TEST(Serialize, DyadicRoundTrip) {
  for (const Dyadic& d : {Dyadic(0), Dyadic(-3), Dyadic(mpz_class(5), 7),
                          Dyadic(mpz_class("123456789012345678901234567890"), 200)}) {
    EXPECT_EQ(dyadic_from_json(Json::parse(to_json(d).dump())), d);
  }
  EXPECT_EQ(to_json(Dyadic(mpz_class(6), 3)), (Json{{"m", "3"}, {"e", 2}}));
  EXPECT_THROW(dyadic_from_json(Json{{"m", "x"}, {"e", 1}}), PreconditionError);
  EXPECT_THROW(dyadic_from_json(Json(3)), PreconditionError);
}

TEST(Serialize, ColumnRoundTrip) {
  const Process p = build_theorem2(KSequence({1, 2, 4, 7}), 3);
  for (std::size_t n = 0; n <= 3; ++n) {
    const Column c = column_from_json(Json::parse(to_json(p.stage(n)).dump()));
    EXPECT_EQ(c.materialize(), p.stage(n).materialize());
    EXPECT_EQ(c.label().materialize(), p.label(n).materialize());
  }
  EXPECT_THROW(column_from_json(Json{{"weird", 1}}), PreconditionError);
}

TEST(Serialize, Budgets) {
  const Budgets b = parse_budgets("k=8192,m=64,steps=1e8,cap=1048576,stages=12");
  EXPECT_EQ(b.k, 8192u);
  EXPECT_EQ(b.m, 64u);
  EXPECT_EQ(b.steps, 100000000u);
  EXPECT_EQ(b.suffix_cap, 1u << 20);
  EXPECT_EQ(b.stages, 12u);
  EXPECT_EQ(budgets_from_json(to_json(b)), b);
  EXPECT_EQ(parse_budgets("").k, Budgets{}.k);
  EXPECT_THROW(parse_budgets("k=0"), PreconditionError);
  EXPECT_THROW(parse_budgets("k=1.5"), PreconditionError);
  EXPECT_THROW(parse_budgets("q=3"), PreconditionError);
  EXPECT_THROW(parse_budgets("k"), PreconditionError);
}

TEST(Serialize, EstimatorsFromJson) {
  EXPECT_EQ(estimator_from_json(Json{{"type", "constant"}, {"value", "2/4"}})->tag(),
            "constant(1/2)");
  EXPECT_EQ(estimator_from_json(Json{{"type", "empirical"}})->tag(), "empirical(k^2*2^|x|)");
  EXPECT_EQ(estimator_from_json(Json{{"type", "empirical"}, {"growth", "k*|x|"}})->tag(),
            "empirical(k*|x|)");
  const auto o = estimator_from_json(Json{{"type", "oracle"}, {"k", {1, 2, 4, 7}}});
  EXPECT_EQ(o->tag(), "oracle(k=1,2,4,7)");
  EXPECT_THROW(estimator_from_json(Json{{"type", "magic"}}), PreconditionError);
  EXPECT_THROW(estimator_from_json(Json{{"type", "constant"}, {"value", "x/y"}}),
               PreconditionError);
}

TEST(Serialize, Theorem2SpecRoundTrip) {
  ProcessSpec s;
  s.stages = 4;
  s.rate = "2^-n";
  const LoadedProcess lp = build_from_spec(s);
  EXPECT_EQ(lp.spec.k, (std::vector<std::uint64_t>{1, 5, 7, 10, 14}));
  const Json doc = process_document(lp);
  const LoadedProcess again = build_from_spec(spec_from_json(Json::parse(doc.dump())));
  EXPECT_EQ(again.process->k_sequence(), lp.process->k_sequence());
  EXPECT_EQ(again.process->label(3).materialize(), lp.process->label(3).materialize());
  EXPECT_THROW(spec_from_json(Json{{"kind", "theorem2"}, {"stages", 2}}), PreconditionError);
  EXPECT_THROW(spec_from_json(Json{{"kind", "other"}, {"stages", 2}}), PreconditionError);
}

TEST(Serialize, AdversaryDocumentRoundTrip) {
  ProcessSpec s;
  s.kind = ProcessKind::adversary;
  s.stages = 4;
  s.estimators = Json::array({Json{{"type", "constant"}, {"value", "0"}},
                              Json{{"type", "empirical"}, {"growth", "k*|x|"}}});
  s.budgets = parse_budgets("k=64,m=8");
  const LoadedProcess lp = build_from_spec(s);
  const Json doc = Json::parse(process_document(lp).dump());
  EXPECT_EQ(trace_from_json(doc.at("trace")), lp.adversary->trace);
  ASSERT_EQ(doc.at("witnesses").size(), lp.adversary->witnesses.size());
  for (std::size_t i = 0; i < lp.adversary->witnesses.size(); ++i) {
    EXPECT_EQ(witness_from_json(doc.at("witnesses")[i]), lp.adversary->witnesses[i]);
  }
  const LoadedProcess again = build_from_spec(spec_from_json(doc));
  EXPECT_EQ(again.adversary->trace, lp.adversary->trace);
}

TEST(Verify, Theorem2AllPass) {
  ProcessSpec s;
  s.stages = 4;
  s.k = {1, 2, 4, 7, 11};
  VerifyOptions opt;
  opt.rate = "0";
  const auto results = run_verification(build_from_spec(s), opt);
  ASSERT_FALSE(results.empty());
  bool saw_label = false;
  for (const auto& r : results) {
    EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
    saw_label = saw_label || r.name.rfind("s(C_2)=", 0) == 0;
  }
  EXPECT_TRUE(saw_label);
}

TEST(Verify, AdversaryAllPassAndTamperFails) {
  ProcessSpec s;
  s.kind = ProcessKind::adversary;
  s.stages = 4;
  s.estimators = Json::array({Json{{"type", "constant"}, {"value", "0"}}});
  s.budgets = parse_budgets("k=64,m=8");
  const LoadedProcess lp = build_from_spec(s);
  for (const auto& r : run_verification(lp, {})) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
  VerifyOptions opt;
  auto w = lp.adversary->witnesses.at(0);
  w.m += 1;
  opt.extra_witnesses.push_back(w);
  bool any_fail = false;
  for (const auto& r : run_verification(lp, opt)) any_fail = any_fail || !r.pass;
  EXPECT_TRUE(any_fail);
  VerifyOptions opt2;
  StageTrace t = lp.adversary->trace;
  t.stages[1].k += 1;
  opt2.recorded_trace = t;
  any_fail = false;
  for (const auto& r : run_verification(lp, opt2)) any_fail = any_fail || !r.pass;
  EXPECT_TRUE(any_fail);
}

TEST(Verify, IntervalSets) {
  const auto a = make_set({DyadicInterval(Dyadic(0), Dyadic::pow2_neg(1)),
                           DyadicInterval(Dyadic::pow2_neg(2), Dyadic(mpz_class(3), 2))});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(set_measure(a), Dyadic(mpz_class(3), 2));
  const auto b = make_set({DyadicInterval(Dyadic(mpz_class(1), 3), Dyadic(1))});
  EXPECT_EQ(set_measure(set_intersection(a, b)), Dyadic(mpz_class(5), 3));
}

#include "cutstack/serialize.hpp"

#include <sstream>

#include "cutstack/error.hpp"

namespace cutstack {

namespace {

Json mpq_json(const mpq_class& q) { return q.get_str(); }

mpq_class mpq_from(const Json& j) {
  mpq_class q;
  const std::string s = j.is_string() ? j.get<std::string>() : j.dump();
  if (q.set_str(s, 10) != 0 || q.get_den() == 0) {
    throw PreconditionError("bad rational '" + s + "'");
  }
  q.canonicalize();
  return q;
}

std::uint64_t u64_from(const Json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0 && v == static_cast<double>(static_cast<std::uint64_t>(v))) {
      return static_cast<std::uint64_t>(v);
    }
  }
  throw PreconditionError("expected a nonnegative integer, got " + j.dump());
}

}  // namespace

Json to_json(const Dyadic& d) {
  return Json{{"m", d.mantissa().get_str()}, {"e", d.exponent()}};
}

Dyadic dyadic_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("e")) {
    throw PreconditionError("dyadic must be {\"m\": str, \"e\": int}");
  }
  mpz_class m;
  const std::string ms = j.at("m").is_string() ? j.at("m").get<std::string>() : j.at("m").dump();
  if (m.set_str(ms, 10) != 0) throw PreconditionError("bad dyadic mantissa '" + ms + "'");
  return Dyadic(m, u64_from(j.at("e")));
}

Json to_json(const DyadicInterval& iv) {
  return Json{{"lo", to_json(iv.lower())}, {"hi", to_json(iv.upper())}};
}

DyadicInterval interval_from_json(const Json& j) {
  return DyadicInterval(dyadic_from_json(j.at("lo")), dyadic_from_json(j.at("hi")));
}

Json to_json(const Column& c) {
  switch (c.kind()) {
    case Column::Kind::base:
      return Json{{"base", to_json(c.slab())}};
    case Column::Kind::doubled:
      return Json{{"double", {{"c", to_json(c.child())}, {"n", c.times()}}}};
    case Column::Kind::stacked: {
      Json parts = Json::array();
      for (const auto& p : c.parts()) parts.push_back(to_json(p));
      return Json{{"stack", parts}};
    }
  }
  return nullptr;
}

Column column_from_json(const Json& j) {
  if (j.contains("base")) return Column::base(interval_from_json(j.at("base")));
  if (j.contains("double")) {
    const Json& d = j.at("double");
    return Column::doubled(column_from_json(d.at("c")), u64_from(d.at("n")));
  }
  if (j.contains("stack")) {
    std::vector<Column> parts;
    for (const auto& p : j.at("stack")) parts.push_back(column_from_json(p));
    return Column::stack(std::move(parts));
  }
  throw PreconditionError("column JSON must have base, double or stack");
}

Json to_json(const Enclosure& e) {
  return Json{{"x", e.x}, {"lo", to_json(e.lo)}, {"hi", to_json(e.hi)}, {"stage", e.stage}};
}

Json to_json(const SlowRateCertificate& c) {
  return Json{{"n", c.n},
              {"h_prime", c.h_prime.get_str()},
              {"lower_bound", to_json(c.lower_bound)},
              {"r_of_h_prime", c.r_of_h_prime},
              {"witness_ok", c.witness_ok},
              {"pass", c.pass}};
}

Json to_json(const Budgets& b) {
  return Json{{"stages", b.stages},
              {"k", b.k},
              {"m", b.m},
              {"steps", b.steps},
              {"suffix_cap", b.suffix_cap}};
}

Budgets budgets_from_json(const Json& j) {
  Budgets b;
  if (j.contains("stages")) b.stages = u64_from(j.at("stages"));
  if (j.contains("k")) b.k = u64_from(j.at("k"));
  if (j.contains("m")) b.m = u64_from(j.at("m"));
  if (j.contains("steps")) b.steps = u64_from(j.at("steps"));
  if (j.contains("suffix_cap")) b.suffix_cap = u64_from(j.at("suffix_cap"));
  return b;
}

Json to_json(const StageTrace& t) {
  Json stages = Json::array();
  for (const auto& s : t.stages) {
    Json f = Json::array();
    for (const auto& fe : s.f) {
      f.push_back(Json{{"code", fe.code},
                       {"e", fe.e},
                       {"i", fe.i},
                       {"m", fe.m},
                       {"k", fe.k},
                       {"value", mpq_json(fe.value)}});
    }
    stages.push_back(
        Json{{"n", s.n}, {"k", s.k}, {"F", f}, {"G", s.g}, {"evaluations", s.evaluations}});
  }
  Json out{{"stages", stages}, {"budgets", to_json(t.budgets)}};
  out["aborted"] = t.aborted ? Json(*t.aborted) : Json(nullptr);
  return out;
}

StageTrace trace_from_json(const Json& j) {
  StageTrace t;
  t.budgets = budgets_from_json(j.at("budgets"));
  for (const auto& s : j.at("stages")) {
    StageRecord r;
    r.n = u64_from(s.at("n"));
    r.k = u64_from(s.at("k"));
    r.evaluations = u64_from(s.at("evaluations"));
    for (const auto& fe : s.at("F")) {
      r.f.push_back(FEntry{u64_from(fe.at("code")), u64_from(fe.at("e")), u64_from(fe.at("i")),
                           u64_from(fe.at("m")), u64_from(fe.at("k")), mpq_from(fe.at("value"))});
    }
    for (const auto& g : s.at("G")) r.g.push_back(u64_from(g));
    t.stages.push_back(std::move(r));
  }
  if (j.contains("aborted") && !j.at("aborted").is_null()) {
    t.aborted = j.at("aborted").get<std::string>();
  }
  return t;
}

Json to_json(const FalsificationWitness& w) {
  return Json{{"e", w.e},
              {"tag", w.tag},
              {"code", w.code},
              {"i", w.i},
              {"m", w.m},
              {"k", w.k},
              {"value", mpq_json(w.value)},
              {"stage", w.stage},
              {"claimed_bound", to_json(w.claimed_bound)},
              {"proven_lower", to_json(w.proven_lower)},
              {"probabilities", w.normalized ? "normalized" : "raw"}};
}

FalsificationWitness witness_from_json(const Json& j) {
  FalsificationWitness w;
  w.e = u64_from(j.at("e"));
  w.tag = j.at("tag").get<std::string>();
  w.code = u64_from(j.at("code"));
  w.i = u64_from(j.at("i"));
  w.m = u64_from(j.at("m"));
  w.k = u64_from(j.at("k"));
  w.value = mpq_from(j.at("value"));
  w.stage = u64_from(j.at("stage"));
  w.claimed_bound = dyadic_from_json(j.at("claimed_bound"));
  w.proven_lower = dyadic_from_json(j.at("proven_lower"));
  w.normalized = j.value("probabilities", std::string("raw")) == "normalized";
  return w;
}

Json to_json(const OrbitSample& s) {
  return Json{{"seed", s.seed},
              {"start", to_json(s.start)},
              {"bits", s.bits},
              {"stage_used", s.stage_used},
              {"sampled_stage", s.sampled_stage},
              {"tv_bound", to_json(s.tv_bound)}};
}

Json to_json(const StarReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back(Json{{"position", x.position}, {"what", x.what}});
  return Json{{"pass", r.pass},
              {"violations", v},
              {"undecided", r.undecided},
              {"strict_patterns", r.strict_patterns}};
}

Json to_json(const EntropyReport& r) {
  Json st = Json::array();
  for (const auto& s : r.stages) {
    st.push_back(Json{{"n", s.n},
                      {"ratio", mpq_json(s.ratio)},
                      {"height_ok", s.height_ok},
                      {"ratio_ok", s.ratio_ok},
                      {"spot_checks", s.spot_checks},
                      {"blocks_ok", s.blocks_ok}});
  }
  return Json{{"pass", r.pass}, {"stages", st}};
}

EstimatorPtr estimator_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") return std::make_shared<ConstantEstimator>(mpq_from(j.at("value")));
  if (type == "empirical") {
    if (!j.contains("growth")) return std::make_shared<EmpiricalEstimator>();
    const Json& g = j.at("growth");
    if (g.is_string()) {
      return std::make_shared<EmpiricalEstimator>(GrowthRule::parse(g.get<std::string>()));
    }
    GrowthRule r;
    r.scale = g.value("scale", std::uint64_t{1});
    r.k_pow = g.value("k_pow", 2u);
    r.len_pow = g.value("len_pow", 0u);
    r.exp2_len = g.value("exp2_len", 1u);
    return std::make_shared<EmpiricalEstimator>(r);
  }
  if (type == "oracle") {
    std::vector<std::uint64_t> k;
    for (const auto& v : j.at("k")) k.push_back(u64_from(v));
    const KSequence ks(k);
    const std::size_t stages = j.contains("stages") ? u64_from(j.at("stages")) : ks.size() - 1;
    return std::make_shared<OracleEstimator>(
        std::make_shared<const Process>(build_theorem2(ks, stages)));
  }
  if (type == "subprocess") {
    return std::make_shared<SubprocessEstimator>(j.at("argv").get<std::vector<std::string>>());
  }
  throw PreconditionError("unknown estimator type '" + type + "'");
}

Budgets parse_budgets(const std::string& text, Budgets base) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw PreconditionError("budget '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    std::uint64_t v = 0;
    try {
      std::size_t used = 0;
      const double d = std::stod(val, &used);
      if (used != val.size() || d < 1 || d > 1e18 || d != static_cast<double>(
                                                         static_cast<std::uint64_t>(d))) {
        throw PreconditionError("");
      }
      v = static_cast<std::uint64_t>(d);
    } catch (const std::exception&) {
      throw PreconditionError("budget '" + item + "': value must be a positive integer");
    }
    if (key == "k") {
      base.k = v;
    } else if (key == "m") {
      base.m = v;
    } else if (key == "steps") {
      base.steps = v;
    } else if (key == "cap" || key == "suffix_cap") {
      base.suffix_cap = v;
    } else if (key == "stages") {
      base.stages = v;
    } else {
      throw PreconditionError("unknown budget '" + key + "' (k, m, steps, cap, stages)");
    }
  }
  return base;
}

Json to_json(const ProcessSpec& s) {
  Json j{{"kind", to_string(s.kind)}, {"stages", s.stages}};
  if (s.kind == ProcessKind::theorem2) {
    j["k"] = s.k;
    if (s.rate) j["rate"] = *s.rate;
  } else {
    j["estimators"] = s.estimators;
    j["budgets"] = to_json(s.budgets);
  }
  return j;
}

ProcessSpec spec_from_json(const Json& j) {
  ProcessSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  s.stages = u64_from(j.at("stages"));
  if (kind == "theorem2") {
    s.kind = ProcessKind::theorem2;
    if (j.contains("rate")) s.rate = j.at("rate").get<std::string>();
    if (j.contains("k")) {
      for (const auto& v : j.at("k")) s.k.push_back(u64_from(v));
    }
    if (s.k.empty() && !s.rate) throw PreconditionError("theorem2 spec needs k or rate");
  } else if (kind == "adversary") {
    s.kind = ProcessKind::adversary;
    s.estimators = j.at("estimators");
    s.budgets = budgets_from_json(j.at("budgets"));
    s.budgets.stages = s.stages;
  } else {
    throw PreconditionError("unknown process kind '" + kind + "'");
  }
  return s;
}

LoadedProcess build_from_spec(const ProcessSpec& spec) {
  LoadedProcess lp;
  lp.spec = spec;
  if (spec.kind == ProcessKind::theorem2) {
    if (spec.k.empty()) {
      const auto r = parse_rate(*spec.rate);
      lp.spec.k = choose_k_for_rate(*r, spec.stages).values();
    }
    const KSequence k(lp.spec.k);
    lp.process = std::make_shared<const Process>(build_theorem2(k, spec.stages));
    return lp;
  }
  std::vector<EstimatorPtr> fs;
  for (const auto& e : spec.estimators) fs.push_back(estimator_from_json(e));
  Budgets b = spec.budgets;
  b.stages = spec.stages;
  lp.spec.budgets = b;
  lp.adversary = build_adversary(std::move(fs), b);
  lp.process = lp.adversary->process;
  return lp;
}

Json process_document(const LoadedProcess& lp) {
  Json j = to_json(lp.spec);
  j["k_sequence"] = lp.process->k_sequence();
  if (lp.adversary) {
    j["trace"] = to_json(lp.adversary->trace);
    Json ws = Json::array();
    for (const auto& w : lp.adversary->witnesses) ws.push_back(to_json(w));
    j["witnesses"] = ws;
  }
  return j;
}

}  // namespace cutstack

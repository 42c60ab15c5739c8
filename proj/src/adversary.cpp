#include "cutstack/adversary.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "cutstack/error.hpp"
#include "cutstack/slowrate.hpp"

namespace cutstack {

std::uint64_t pairing(std::uint64_t e, std::uint64_t i) {
  if (e < 1 || i < 1) throw PreconditionError("pairing: arguments must be >= 1");
  const std::uint64_t s = e + i;
  return (s - 2) * (s - 1) / 2 + e;
}

std::pair<std::uint64_t, std::uint64_t> unpairing(std::uint64_t code) {
  if (code < 1) throw PreconditionError("unpairing: code must be >= 1");
  // Diagonal d = e + i - 1 holds codes (d-1)d/2 + 1 .. d(d+1)/2.
  std::uint64_t d = 1;
  while (d * (d + 1) / 2 < code) ++d;
  const std::uint64_t e = code - (d - 1) * d / 2;
  return {e, d + 1 - e};
}

namespace {

std::size_t zero_cap(std::uint64_t m) { return std::max<std::size_t>(kDefaultPatternCap, m); }

Dyadic code_bound(std::uint64_t code) { return Dyadic::pow2_neg(code + 2); }

std::uint64_t ceil_log2(std::uint64_t m) {
  std::uint64_t t = 0;
  while ((std::uint64_t{1} << t) < m) ++t;
  return t;
}

// The stacked part A_code(k_n - code - 1) of stage column c, if present.
const Column* find_a_part(const Column& c, std::uint64_t code) {
  if (c.kind() != Column::Kind::stacked) return nullptr;
  const DyadicInterval a = a_interval(code);
  for (const auto& part : c.parts()) {
    const Column& base = part.kind() == Column::Kind::doubled ? part.child() : part;
    if (base.kind() == Column::Kind::base && base.slab() == a) return &part;
  }
  return nullptr;
}

}  // namespace

AdversaryRun build_adversary(std::vector<EstimatorPtr> fs, const Budgets& budgets) {
  if (budgets.k < 1 || budgets.m < 1 || budgets.steps < 1) {
    throw PreconditionError("adversary: budgets must be >= 1");
  }
  for (const auto& f : fs) {
    if (!f) throw PreconditionError("adversary: null estimator");
  }
  AdversaryRun run;
  run.estimators = std::move(fs);
  run.trace.budgets = budgets;

  std::vector<Column> cols{Column::base(x1_interval())};
  std::vector<std::uint64_t> ks{1};
  run.trace.stages.push_back(StageRecord{0, 1, {}, {}, 0});
  std::set<std::uint64_t> used;  // J so far
  const std::uint64_t big_e = run.estimators.size();

  for (std::size_t n = 1; n <= budgets.stages; ++n) {
    const Column& prev = cols.back();
    const mpz_class& h = prev.height();
    if (h > budgets.suffix_cap) {
      run.trace.aborted = "stage " + std::to_string(n) + ": h(C_" + std::to_string(n - 1) +
                          ") = " + h.get_str() + " exceeds suffix cap " +
                          std::to_string(budgets.suffix_cap);
      break;
    }
    const std::string s = prev.label().materialize(budgets.suffix_cap);
    const std::uint64_t hh = s.size();
    StageRecord rec;
    rec.n = n;

    for (std::uint64_t e = 1; e <= std::min<std::uint64_t>(n, big_e); ++e) {
      const Estimator& f = *run.estimators[e - 1];
      const auto floor = f.value_floor();
      for (std::uint64_t i = 1; i <= hh; ++i) {
        const std::uint64_t code = pairing(e, i);
        if (floor) {
          // No precision within budget can beat 2^-(code+2); larger i only
          // make the bound smaller.
          const mpq_class bound = code_bound(std::min<std::uint64_t>(code, 4096)).to_mpq();
          if (code > 4096 || *floor >= bound || 1 / (bound - *floor) >= budgets.k) break;
        }
        if (used.count(code)) continue;
        const std::string_view suffix(s.data() + (i - 1), hh - i + 1);
        for (std::uint64_t m = 1; m <= budgets.m; ++m) {
          FHatQuery q{code, m, suffix, budgets.k, budgets.m, budgets.steps};
          ++rec.evaluations;
          if (auto hit = fhat_search(f, q)) {
            rec.f.push_back(FEntry{code, e, i, m, hit->k, hit->value});
            break;
          }
          // Windows of the growth-rule estimators only lengthen with m.
          if (auto emp = dynamic_cast<const EmpiricalEstimator*>(&f)) {
            const auto g = emp->rule()(1, m + 1);
            if (!g || *g > std::min<std::uint64_t>(suffix.size(), budgets.steps)) break;
          }
        }
      }
    }

    std::sort(rec.f.begin(), rec.f.end(),
              [](const FEntry& a, const FEntry& b) { return a.code < b.code; });
    std::uint64_t kn = ks.back() + 1;
    for (const auto& fe : rec.f) {
      rec.g.push_back(fe.code);
      used.insert(fe.code);
      // 2^(t - code - 1) >= 2m.
      kn = std::max(kn, fe.code + 2 + ceil_log2(fe.m));
    }
    std::vector<Column> parts{Column::doubled(prev, kn - ks.back())};
    for (const auto& fe : rec.f) {
      parts.push_back(Column::doubled(Column::base(a_interval(fe.code)), kn - fe.code - 1));
    }
    Column next = Column::stack(std::move(parts));
    if (next.width() != Dyadic::pow2_neg(kn)) {
      throw std::logic_error("adversary: width alignment failed at stage " + std::to_string(n));
    }
    rec.k = kn;
    cols.push_back(std::move(next));
    ks.push_back(kn);
    run.trace.stages.push_back(std::move(rec));
  }

  run.process = std::make_shared<const Process>(ProcessKind::adversary, ks, cols);
  for (const auto& rec : run.trace.stages) {
    for (const auto& fe : rec.f) {
      FalsificationWitness w;
      w.e = fe.e;
      w.tag = run.estimators[fe.e - 1]->tag();
      w.code = fe.code;
      w.i = fe.i;
      w.m = fe.m;
      w.k = fe.k;
      w.value = fe.value;
      w.stage = rec.n;
      w.claimed_bound = code_bound(fe.code);
      w.proven_lower = run.process->block_prob(rec.n, std::string(fe.m, '0'), zero_cap(fe.m));
      run.witnesses.push_back(std::move(w));
    }
  }
  return run;
}

const char* to_string(Tri t) {
  switch (t) {
    case Tri::yes:
      return "true";
    case Tri::no:
      return "false";
    case Tri::unknown:
      return "unknown";
  }
  return "?";
}

Tri r_member(const Process& p, std::uint64_t n, std::uint64_t m, std::size_t stage_budget) {
  if (m < 1) throw PreconditionError("r_member: m must be >= 1");
  const Dyadic bound = code_bound(n);
  const std::string x(m, '0');
  const std::size_t last = std::min(stage_budget, p.last_stage());
  for (std::size_t s = 0; s <= last; ++s) {
    const Dyadic lo = p.block_prob(s, x, zero_cap(m));
    if (lo >= bound) return Tri::no;
    // Raw P(0^m) - P_s(0^m) <= (1 - lambda(S_s)) + (m-1) w_s for any process.
    const Dyadic hi = lo + (Dyadic(1) - p.support_measure(s)) +
                      p.width(s) * mpz_class(static_cast<unsigned long>(m - 1));
    if (hi < bound) return Tri::yes;
  }
  return Tri::unknown;
}

WitnessCheck check_witness(const AdversaryRun& run, const FalsificationWitness& w) {
  WitnessCheck c;
  const auto fail = [&](const std::string& why) {
    if (c.detail.empty()) c.detail = why;
  };
  const Process& p = *run.process;

  // Trace agreement.
  const StageRecord* rec = w.stage < run.trace.stages.size() ? &run.trace.stages[w.stage] : nullptr;
  const FEntry* fe = nullptr;
  if (rec) {
    for (const auto& x : rec->f) {
      if (x.code == w.code) fe = &x;
    }
  }
  c.trace_ok = rec && fe && std::count(rec->g.begin(), rec->g.end(), w.code) == 1 &&
               fe->m == w.m && fe->e == w.e && fe->i == w.i && fe->k == w.k &&
               fe->value == w.value && w.e >= 1 && w.e <= run.estimators.size() &&
               pairing(w.e, w.i) == w.code && run.estimators[w.e - 1]->tag() == w.tag;
  if (!c.trace_ok) fail("witness does not match the stage trace");
  if (w.stage < 1 || w.stage > p.last_stage()) {
    fail("witness stage not built");
    return c;
  }

  // s(A_code(k_n - code - 1)) = 0^(2^(k_n-code-1)) and that run covers 0^(2m).
  const Column* a = find_a_part(p.stage(w.stage), w.code);
  mpz_class need_h;
  mpz_ui_pow_ui(need_h.get_mpz_t(), 2, p.k(w.stage) - std::min(p.k(w.stage), w.code + 1));
  if (a) {
    const mpz_class& h = a->height();
    c.column_ok = w.code + 1 <= p.k(w.stage) && h == need_h &&
                  a->label().count_occurrences("0") == h && h >= 2 * w.m;
    // Bottom half of the A-part: h/2 levels of width w_n.
    c.measure_ok = p.width(w.stage) * mpz_class(h / 2) == code_bound(w.code) &&
                   w.claimed_bound == code_bound(w.code);
  }
  if (!c.column_ok) fail("A-part of the stage column missing or too short");
  if (!c.measure_ok) fail("measure of the first half levels differs from the claimed bound");

  const Dyadic lo = p.block_prob(w.stage, std::string(w.m, '0'), zero_cap(w.m));
  c.prob_ok = lo >= code_bound(w.code) && lo == w.proven_lower;
  if (!c.prob_ok) fail("P_n(0^m) below 2^-(code+2)");

  // Re-run the f-hat query on the recorded suffix; m must be the least claim.
  if (c.trace_ok) {
    const Estimator& f = *run.estimators[w.e - 1];
    const Column& prev = p.stage(w.stage - 1);
    const auto hh = prev.height();
    if (w.i >= 1 && hh >= w.i) {
      const std::string s = prev.label().materialize(kMaterializeLimit);
      const std::string_view suffix(s.data() + (w.i - 1), s.size() - w.i + 1);
      const Budgets& b = run.trace.budgets;
      auto hit = fhat_search(f, FHatQuery{w.code, w.m, suffix, b.k, b.m, b.steps});
      c.fhat_ok = hit && hit->k == w.k && hit->value == w.value;
      for (std::uint64_t m = 1; c.fhat_ok && m < w.m; ++m) {
        if (fhat_member(f, FHatQuery{w.code, m, suffix, b.k, b.m, b.steps})) c.fhat_ok = false;
      }
    }
  }
  if (!c.fhat_ok) fail("f-hat re-evaluation does not reproduce the claim");
  return c;
}

bool verify_witness(const AdversaryRun& run, const FalsificationWitness& w) {
  return check_witness(run, w).ok();
}

EntropyReport adversary_entropy_check(const Process& p, std::size_t samples, std::uint64_t seed) {
  EntropyReport rep;
  std::mt19937_64 rng(seed);
  const auto profile = p.entropy_profile();
  for (std::size_t n = 0; n <= p.last_stage(); ++n) {
    EntropyStage st;
    st.n = n;
    st.ratio = profile[n];
    const std::uint64_t kn = p.k(n);
    mpz_class half_size;
    mpz_ui_pow_ui(half_size.get_mpz_t(), 2, kn - 1);
    st.height_ok = p.height(n) >= half_size;
    mpq_class cap(mpz_class(static_cast<unsigned long>(kn)), half_size);
    cap.canonicalize();
    st.ratio_ok = st.ratio > 0 && st.ratio <= cap;
    st.blocks_ok = true;
    const mpz_class& h = p.height(n);
    const LabelString& label = p.label(n);
    for (std::size_t t = 0; t < samples; ++t) {
      // Random level i, window length up to the pattern cap.
      mpz_class i;
      {
        const std::uint64_t r = rng();
        mpz_class big(static_cast<unsigned long>(r));
        big <<= 64;
        big += static_cast<unsigned long>(rng());
        i = big % h + 1;
      }
      const mpz_class room = h - i + 1;
      const std::size_t max_len =
          room >= kDefaultPatternCap ? kDefaultPatternCap : room.get_ui();
      const std::size_t len = 1 + rng() % max_len;
      const std::string x = label.extract(i, len);
      if (p.block_prob(n, x) < p.width(n)) st.blocks_ok = false;
      ++st.spot_checks;
    }
    if (!(st.height_ok && st.ratio_ok && st.blocks_ok)) rep.pass = false;
    rep.stages.push_back(std::move(st));
  }
  return rep;
}

std::vector<Verdict> verdicts(const AdversaryRun& run) {
  std::vector<Verdict> out;
  for (std::uint64_t e = 1; e <= run.estimators.size(); ++e) {
    Verdict v;
    v.e = e;
    v.tag = run.estimators[e - 1]->tag();
    v.verified = true;
    for (const auto& w : run.witnesses) {
      if (w.e != e) continue;
      ++v.witnesses;
      v.verified = v.verified && verify_witness(run, w);
    }
    v.status = v.witnesses ? "falsified" : "defeated by silence";
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace cutstack

#include "cutstack/verify.hpp"

#include <algorithm>
#include <random>

#include "cutstack/error.hpp"

namespace cutstack {

IntervalSet make_set(std::vector<DyadicInterval> ivs) {
  std::sort(ivs.begin(), ivs.end(),
            [](const auto& a, const auto& b) { return a.lower() < b.lower(); });
  IntervalSet out;
  for (auto& iv : ivs) {
    if (!out.empty() && iv.lower() <= out.back().upper()) {
      if (out.back().upper() < iv.upper()) {
        out.back() = DyadicInterval(out.back().lower(), iv.upper());
      }
      continue;
    }
    out.push_back(std::move(iv));
  }
  return out;
}

IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
  IntervalSet out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const Dyadic& lo = std::max(a[i].lower(), b[j].lower());
    const Dyadic& hi = std::min(a[i].upper(), b[j].upper());
    if (lo < hi) out.emplace_back(lo, hi);
    if (a[i].upper() < b[j].upper()) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

Dyadic set_measure(const IntervalSet& s) {
  Dyadic m(0);
  for (const auto& iv : s) m += iv.width();
  return m;
}

bool lemma2_holds(const Column& c, const std::vector<std::uint64_t>& J, std::uint64_t k,
                  std::uint64_t block) {
  const auto levels = c.materialize();
  const Column d = Column::doubled(c, k);
  const auto dlevels = d.materialize();
  const std::uint64_t h = levels.size();
  if (k >= 64 || block >= (std::uint64_t{1} << k)) {
    throw PreconditionError("lemma2: block outside 0..2^k-1");
  }
  std::vector<DyadicInterval> chosen;
  std::vector<DyadicInterval> shifted;
  for (std::uint64_t j : J) {
    if (j < 1 || j > h) throw PreconditionError("lemma2: level outside the column");
    chosen.push_back(levels[j - 1]);
    shifted.push_back(dlevels[j + block * h - 1]);
  }
  std::vector<DyadicInterval> block_levels(dlevels.begin() + block * h,
                                           dlevels.begin() + (block + 1) * h);
  const IntervalSet lhs = set_intersection(make_set(chosen), make_set(block_levels));
  const IntervalSet rhs = make_set(shifted);
  return lhs == rhs && set_measure(lhs) == set_measure(make_set(chosen)).scaled(
                                               -static_cast<std::int64_t>(k));
}

namespace {

std::string kseq_text(const std::vector<std::uint64_t>& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s;
}

void bookkeeping_theorem2(const Process& p, std::vector<CheckResult>& out) {
  bool ok = true;
  std::string detail;
  for (std::size_t n = 0; n <= p.last_stage(); ++n) {
    const Dyadic lambda = Dyadic(1) - Dyadic::pow2_neg(n + 1);
    mpz_class h = (Dyadic::pow2(p.k(n)) * lambda).floor();
    if (p.width(n) != Dyadic::pow2_neg(p.k(n)) || p.support_measure(n) != lambda ||
        p.height(n) != h) {
      ok = false;
      detail = "stage " + std::to_string(n);
      break;
    }
  }
  out.push_back({"stage bookkeeping (w, lambda(S), h)", ok, detail});
}

void recursion_theorem2(const Process& p, std::vector<CheckResult>& out) {
  constexpr std::uint64_t kSmall = 1 << 16;
  for (std::size_t n = 0; n <= p.last_stage(); ++n) {
    if (p.height(n) <= 64) {
      out.push_back({"s(C_" + std::to_string(n) + ")=" + p.label(n).materialize(), true, ""});
    }
  }
  bool ok = true;
  std::string detail;
  for (std::size_t n = 1; n <= p.last_stage() && ok; ++n) {
    const auto& prev = p.label(n - 1);
    const auto& cur = p.label(n);
    mpz_class copies;
    mpz_ui_pow_ui(copies.get_mpz_t(), 2, p.k(n) - p.k(n - 1));
    mpz_class zeros;
    mpz_ui_pow_ui(zeros.get_mpz_t(), 2, p.k(n) - n - 1);
    if (cur.length() != prev.length() * copies + zeros) {
      ok = false;
    } else if (cur.length() <= kSmall) {
      std::string expect;
      const std::string base = prev.materialize();
      for (mpz_class c = 0; c < copies; ++c) expect += base;
      expect.append(zeros.get_ui(), '0');
      ok = cur.materialize() == expect;
    } else {
      ok = cur.count_occurrences("0") == prev.count_occurrences("0") * copies + zeros &&
           cur.extract(cur.length() - 63, 64) == std::string(64, '0');
      if (ok && prev.length() <= kSmall) {
        ok = cur.extract(1, prev.length().get_ui()) == prev.materialize();
      }
    }
    if (!ok) detail = "stage " + std::to_string(n);
  }
  out.push_back({"label recursion s(C_n) = s(C_{n-1})^(2^dk) 0^(2^(k_n-n-1))", ok, detail});
}

void closed_forms(const Process& p, std::vector<CheckResult>& out) {
  const KSequence k(p.k_sequence());
  const std::size_t last = p.last_stage();
  if (last < 1) return;
  bool ok = true;
  std::string detail;
  // 0 1^(2^(k_1-1)) 0
  if (k[1] - 1 < 6) {
    const std::string x = "0" + std::string(std::size_t{1} << (k[1] - 1), '1') + "0";
    const Enclosure e = p.enclosure_at(x, last);
    if (!e.contains(Dyadic::pow2_neg(k[1]))) {
      ok = false;
      detail = x;
    }
  }
  for (std::size_t n = 1; n < last && ok; ++n) {
    const mpz_class f = zero_run_length(k, n);
    if (f + 2 > kDefaultPatternCap) break;
    const std::string x = "1" + std::string(f.get_ui(), '0') + "1";
    const Enclosure e = p.enclosure_at(x, last);
    // From stage n+1 on the stage value is already the limit.
    const Dyadic v = closed_form(k, RunKind::zero_run, f);
    if (!e.contains(v) || p.block_prob(n + 1, x) != v) {
      ok = false;
      detail = x;
    }
  }
  out.push_back({"closed forms inside stage enclosures", ok, detail});

  bool half = true;
  for (std::size_t n = 0; n <= last; ++n) {
    half = half && p.block_prob(n, "1") == Dyadic::pow2_neg(1) &&
           p.block_prob(n, "0") + p.block_prob(n, "1") == p.support_measure(n);
  }
  out.push_back({"P_n(1) = 1/2 and P_n(0) + P_n(1) = lambda(S(C_n))", half, ""});
}

void monotone(const Process& p, std::vector<CheckResult>& out) {
  bool ok = true;
  std::string detail;
  for (std::size_t len = 1; len <= 4 && ok; ++len) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len) && ok; ++v) {
      std::string x;
      for (std::size_t b = len; b-- > 0;) x.push_back(((v >> b) & 1) ? '1' : '0');
      for (std::size_t n = 0; n <= p.last_stage() && ok; ++n) {
        const Dyadic pn = p.block_prob(n, x);
        if (n + 1 <= p.last_stage() && p.block_prob(n + 1, x) < pn) ok = false;
        if (pn < p.block_prob(n, x + "0") + p.block_prob(n, x + "1")) ok = false;
        if (!ok) detail = "x=" + x + " stage " + std::to_string(n);
      }
    }
  }
  out.push_back({"P_n(x) <= P_{n+1}(x) and P_n(x) >= P_n(x0) + P_n(x1)", ok, detail});
}

void lemma2_suite(const Process& p, const VerifyOptions& opt, std::vector<CheckResult>& out) {
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> small;
  for (std::size_t n = 0; n <= p.last_stage(); ++n) {
    if (p.height(n) <= 256) small.push_back(n);
  }
  bool ok = true;
  std::size_t done = 0;
  for (std::size_t t = 0; t < opt.lemma2_instances && !small.empty(); ++t) {
    const Column& c = p.stage(small[rng() % small.size()]);
    const std::uint64_t h = c.height().get_ui();
    const std::uint64_t k = rng() % 4;
    std::vector<std::uint64_t> J;
    for (std::uint64_t j = 1; j <= h; ++j) {
      if (rng() & 1) J.push_back(j);
    }
    if (J.empty()) J.push_back(1 + rng() % h);
    const std::uint64_t block = rng() % (std::uint64_t{1} << k);
    ok = ok && lemma2_holds(c, J, k, block);
    ++done;
  }
  out.push_back({"doubling shift-and-scale identity (" + std::to_string(done) + " instances)",
                 ok, ""});
}

void entropy(const Process& p, const VerifyOptions& opt, std::vector<CheckResult>& out) {
  const auto rep = adversary_entropy_check(p, 16, opt.seed);
  out.push_back({"entropy profile k_n/h_n and block lower bounds", rep.pass, ""});
}

void bookkeeping_adversary(const AdversaryRun& run, std::vector<CheckResult>& out) {
  const Process& p = *run.process;
  bool ok = true;
  std::string detail;
  Dyadic lambda = Dyadic::pow2_neg(1);
  std::vector<std::uint64_t> seen;
  for (std::size_t n = 0; n <= p.last_stage() && ok; ++n) {
    const StageRecord& rec = run.trace.stages.at(n);
    for (auto c : rec.g) {
      if (std::find(seen.begin(), seen.end(), c) != seen.end()) ok = false;
      seen.push_back(c);
      lambda += Dyadic::pow2_neg(c + 1);
    }
    ok = ok && rec.k == p.k(n) && p.width(n) == Dyadic::pow2_neg(p.k(n)) &&
         p.support_measure(n) == lambda && (n == 0 || p.k(n) >= p.k(n - 1) + 1);
    for (const auto& fe : rec.f) {
      mpz_class len;
      mpz_ui_pow_ui(len.get_mpz_t(), 2, p.k(n) - fe.code - 1);
      ok = ok && len >= 2 * fe.m;
    }
    if (!ok) detail = "stage " + std::to_string(n);
  }
  out.push_back({"adversary stage bookkeeping (widths, fresh codes, lambda(S))", ok, detail});
}

}  // namespace

std::vector<CheckResult> run_verification(const LoadedProcess& lp, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const Process& p = *lp.process;
  out.push_back({"process " + std::string(to_string(p.kind())) + " k=" +
                     kseq_text(p.k_sequence()),
                 true, ""});
  if (p.kind() == ProcessKind::theorem2) {
    bookkeeping_theorem2(p, out);
    recursion_theorem2(p, out);
    closed_forms(p, out);
    if (opt.rate) {
      const auto r = parse_rate(*opt.rate);
      for (std::size_t n = 1; n <= p.last_stage(); ++n) {
        const auto cert = slowrate_certificate(p, n, r.get());
        out.push_back({"slow-rate certificate n=" + std::to_string(n) + " h'=" +
                           cert.h_prime.get_str() + " r(h')=" + cert.r_of_h_prime,
                       cert.pass, ""});
      }
    }
  } else if (lp.adversary) {
    bookkeeping_adversary(*lp.adversary, out);
    std::size_t good = 0;
    for (const auto& w : lp.adversary->witnesses) {
      const auto c = check_witness(*lp.adversary, w);
      good += c.ok();
      if (!c.ok()) out.push_back({"witness code " + std::to_string(w.code), false, c.detail});
    }
    out.push_back({"witnesses re-verified (" + std::to_string(good) + "/" +
                       std::to_string(lp.adversary->witnesses.size()) + ")",
                   good == lp.adversary->witnesses.size(), ""});
    for (const auto& w : opt.extra_witnesses) {
      const auto c = check_witness(*lp.adversary, w);
      out.push_back({"witness file entry code " + std::to_string(w.code), c.ok(), c.detail});
    }
    if (opt.recorded_trace) {
      out.push_back({"rebuilt stage trace matches the recorded one",
                     *opt.recorded_trace == lp.adversary->trace, ""});
    }
  }
  monotone(p, out);
  lemma2_suite(p, opt, out);
  entropy(p, opt, out);
  return out;
}

}  // namespace cutstack

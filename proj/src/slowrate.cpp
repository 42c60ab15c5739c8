#include "cutstack/slowrate.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "cutstack/error.hpp"

namespace cutstack {

KSequence::KSequence(std::vector<std::uint64_t> values) : values_(std::move(values)) {
  if (values_.empty() || values_.front() != 1) {
    throw PreconditionError("k-sequence must start with k_0 = 1");
  }
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] <= values_[i - 1]) {
      throw PreconditionError("k-sequence must be strictly increasing (k_" +
                              std::to_string(i) + " = " + std::to_string(values_[i]) +
                              ")");
    }
  }
}

KSequence KSequence::gap_sequence(std::size_t last) {
  std::vector<std::uint64_t> v{1};
  for (std::size_t i = 1; i <= last; ++i) v.push_back(v.back() + i);
  return KSequence(std::move(v));
}

bool KSequence::gap_condition() const {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] - values_[i - 1] < i) return false;
  }
  return true;
}

DyadicInterval a_interval(std::uint64_t n) {
  return DyadicInterval(Dyadic::pow2_neg(n + 1), Dyadic::pow2_neg(n));
}

DyadicInterval x1_interval() { return DyadicInterval(Dyadic::pow2_neg(1), Dyadic(1)); }

Process build_theorem2(const KSequence& k, std::size_t stages) {
  if (stages + 1 > k.size()) {
    throw PreconditionError("build_theorem2: " + std::to_string(stages) +
                            " stages need k_0..k_" + std::to_string(stages));
  }
  std::vector<Column> cols{Column::base(x1_interval())};
  for (std::size_t n = 1; n <= stages; ++n) {
    cols.push_back(Column::stack(Column::doubled(cols.back(), k[n] - k[n - 1]),
                                 Column::doubled(Column::base(a_interval(n)), k[n] - (n + 1))));
  }
  std::vector<std::uint64_t> kv(k.values().begin(), k.values().begin() + stages + 1);
  return Process(ProcessKind::theorem2, std::move(kv), std::move(cols));
}

mpz_class zero_run_length(const KSequence& k, std::size_t n) {
  mpz_class f = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    mpz_class term;
    mpz_ui_pow_ui(term.get_mpz_t(), 2, k[i] - (i + 1));
    f += term;
  }
  return f;
}

Dyadic closed_form(const KSequence& k, RunKind kind, const mpz_class& m) {
  if (m < 1) throw PreconditionError("closed_form: run length must be at least 1");
  if (k.size() < 2) throw PreconditionError("closed_form: needs k_1");
  if (kind == RunKind::one_run) {
    mpz_class b;
    mpz_ui_pow_ui(b.get_mpz_t(), 2, k[1] - 1);
    return m == b ? Dyadic::pow2_neg(k[1]) : Dyadic(0);
  }
  mpz_class f = 0;
  for (std::size_t n = 1; n < k.size(); ++n) {
    mpz_class term;
    mpz_ui_pow_ui(term.get_mpz_t(), 2, k[n] - (n + 1));
    f += term;
    if (m < f) return Dyadic(0);
    if (m != f) continue;
    // Every top of a C_n copy is followed by a C_n bottom except the last
    // copy inside each C_{n+1}.
    if (n + 1 >= k.size()) {
      throw PreconditionError("closed_form: run length f(" + std::to_string(n) +
                              ") needs k_" + std::to_string(n + 1));
    }
    return Dyadic::pow2_neg(k[n]) - Dyadic::pow2_neg(k[n + 1]);
  }
  throw PreconditionError("closed_form: run length " + m.get_str() +
                          " beyond f of the last known k");
}

Dyadic b_intersection_measure(const KSequence& k, std::size_t n) {
  if (n >= k.size()) throw PreconditionError("b_intersection_measure: k_n unknown");
  Dyadic v = Dyadic::pow2_neg(1);
  for (std::size_t i = 1; i <= n; ++i) {
    v *= Dyadic(1) - Dyadic::pow2_neg(k[i] - k[i - 1]);
  }
  return v;
}

std::optional<Dyadic> b_limit_lower_bound(const KSequence& k) {
  if (!k.gap_condition()) return std::nullopt;
  const std::size_t n = k.size() - 1;
  return b_intersection_measure(k, n) * (Dyadic(1) - Dyadic::pow2_neg(n));
}

namespace {

// Calls on_zero(a, pos) for every 1 0^a 1 (a >= 0) and on_one(b, pos) for
// every 0 1^b 0, in order of completion; pos is the first symbol's index.
template <typename Zero, typename One>
void scan_runs(std::string_view bits, Zero on_zero, One on_one) {
  std::size_t run_start = 0;
  bool bounded = false;
  for (std::size_t i = 1; i <= bits.size(); ++i) {
    if (i < bits.size() && bits[i] == bits[i - 1]) {
      if (bits[i] == '1') on_zero(0, i - 1);
      continue;
    }
    if (i < bits.size() && bounded) {
      const std::uint64_t len = i - run_start;
      if (bits[i - 1] == '0') {
        on_zero(len, run_start - 1);
      } else {
        on_one(len, run_start - 1);
      }
    }
    run_start = i;
    bounded = true;
  }
}

}  // namespace

StarReport star_check(std::string_view bits, const KSequence& k) {
  StarReport report;
  std::vector<mpz_class> f;
  for (std::size_t n = 0; n < k.size(); ++n) f.push_back(zero_run_length(k, n));
  std::vector<bool> seen(f.size(), false);
  auto violate = [&](std::size_t pos, std::string what) {
    report.pass = false;
    report.violations.push_back({pos, std::move(what)});
  };
  scan_runs(
      bits,
      [&](std::uint64_t a, std::size_t pos) {
        mpz_class am(static_cast<unsigned long>(a));
        auto it = std::lower_bound(f.begin(), f.end(), am);
        if (it == f.end()) {
          ++report.undecided;
          return;
        }
        if (*it != am) {
          violate(pos, "1 0^" + std::to_string(a) + " 1 has probability zero");
          return;
        }
        const auto idx = static_cast<std::size_t>(it - f.begin());
        if (seen[idx]) return;
        for (std::size_t j = 0; j < idx; ++j) {
          if (!seen[j]) {
            violate(pos, "first 1 0^" + f[idx].get_str() + " 1 precedes first 1 0^" +
                             f[j].get_str() + " 1");
            break;
          }
        }
        seen[idx] = true;
      },
      [&](std::uint64_t b, std::size_t pos) {
        if (k.size() < 2) return;
        if (b != (std::uint64_t{1} << (k[1] - 1))) {
          violate(pos, "0 1^" + std::to_string(b) + " 0 has probability zero");
        }
      });
  return report;
}

void KRecovery::seed_k0() {
  if (table_.k.empty()) {
    table_.k.push_back(1);
    f_.push_back(0);
  }
}

bool KRecovery::fail(std::string why) {
  table_.consistent = false;
  table_.diagnostic = std::move(why);
  return false;
}

bool KRecovery::on_zero_run(std::uint64_t a) {
  const bool empty = table_.k.empty();
  seed_k0();
  if (a == 0) return empty;
  const mpz_class am(static_cast<unsigned long>(a));
  if (std::binary_search(f_.begin(), f_.end(), am)) return empty;
  if (am < f_.back()) {
    return fail("1 0^" + std::to_string(a) + " 1 matches no run length f(n)");
  }
  const mpz_class gap = am - f_.back();
  if (!std::has_single_bit(gap.get_ui()) || !gap.fits_ulong_p()) {
    return fail("run gap " + gap.get_str() + " is not a power of two");
  }
  const std::size_t n = table_.k.size();
  const std::uint64_t kn = std::countr_zero(gap.get_ui()) + n + 1;
  if (kn <= table_.k.back()) {
    return fail("decoded k_" + std::to_string(n) + " = " + std::to_string(kn) +
                " does not increase");
  }
  table_.k.push_back(kn);
  f_.push_back(am);
  return true;
}

bool KRecovery::on_one_run(std::uint64_t b) {
  if (!std::has_single_bit(b) || b < 2) {
    return fail("0 1^" + std::to_string(b) + " 0 run is not 2^(k_1 - 1)");
  }
  const std::uint64_t k1 = std::countr_zero(b) + 1;
  if (table_.k.size() >= 2) {
    if (table_.k[1] != k1) {
      return fail("0 1^" + std::to_string(b) + " 0 disagrees with k_1 = " +
                  std::to_string(table_.k[1]));
    }
    return false;
  }
  seed_k0();
  table_.k.push_back(k1);
  mpz_class f1;
  mpz_ui_pow_ui(f1.get_mpz_t(), 2, k1 - 2);
  f_.push_back(f1);
  return true;
}

bool KRecovery::push(char symbol) {
  ++consumed_;
  if (!table_.consistent) return false;
  if (consumed_ == 1) {
    last_ = symbol;
    run_ = 1;
    run_bounded_ = false;
    return false;
  }
  bool grew = false;
  if (symbol == last_) {
    ++run_;
    if (symbol == '1') grew = on_zero_run(0);
    return grew;
  }
  if (run_bounded_) grew = last_ == '0' ? on_zero_run(run_) : on_one_run(run_);
  last_ = symbol;
  run_ = 1;
  run_bounded_ = true;
  return grew;
}

KRecoveryTrace recover_k_trace(std::string_view bits) {
  KRecovery rec;
  KRecoveryTrace trace;
  for (char c : bits) {
    if (c != '0' && c != '1') throw PreconditionError("recover_k: input must be binary");
    const std::size_t before = rec.table().k.size();
    rec.push(c);
    for (std::size_t i = before; i < rec.table().k.size(); ++i) {
      trace.found_at.push_back(rec.consumed());
    }
    if (!rec.table().consistent) {
      trace.inconsistent_at = rec.consumed();
      break;
    }
  }
  trace.table = rec.table();
  return trace;
}

KTable recover_k(std::string_view bits) { return recover_k_trace(bits).table; }

Enclosure g_enclosure(std::string_view x, const KSequence& k) {
  const std::size_t n = k.size() - 1;
  Enclosure e = build_theorem2(k, n).enclosure_at(x, n);
  if (e.hi > Dyadic(1)) e.hi = Dyadic(1);
  return e;
}

GEstimate g_estimate(std::string_view x, std::uint64_t k, const KRecoveryTrace& trace) {
  if (k < 1) throw PreconditionError("g_estimate: precision k must be at least 1");
  if (x.size() > kDefaultPatternCap) {
    throw PreconditionError("g_estimate: pattern longer than the cap");
  }
  const Dyadic xlen_minus_one(static_cast<long>(x.empty() ? 0 : x.size() - 1));
  GEstimate out;
  for (std::size_t t = 1; t <= trace.table.k.size(); ++t) {
    const std::size_t n = t - 1;
    const std::uint64_t kn = trace.table.k[n];
    // Clipped width from the known terms only; counting is deferred.
    Dyadic slack = Dyadic::pow2_neg(n + 1) + xlen_minus_one * Dyadic::pow2_neg(kn);
    if (Dyadic(1) < slack) slack = Dyadic(1);
    if (slack.to_mpq() * k > 1) continue;
    KSequence ks(std::vector<std::uint64_t>(trace.table.k.begin(), trace.table.k.begin() + t));
    Enclosure e = g_enclosure(x, ks);
    if (e.width().to_mpq() * k > 1) continue;
    out.value = ((e.lo + e.hi).half()).to_mpq();
    out.pairs_used = t;
    out.prefix_used = trace.found_at[n];
    return out;
  }
  if (trace.inconsistent_at) {
    throw InconsistentInput("g_estimate: " + trace.table.diagnostic);
  }
  return out;
}

GEstimate g_estimate(std::string_view x, std::uint64_t k, std::string_view bits) {
  return g_estimate(x, k, recover_k_trace(bits));
}

namespace {

bool fits_small(const mpz_class& n) { return n <= 1 << 20; }

class PowerRate : public RateOracle {
 public:
  int compare(const mpz_class& n, const Dyadic& d) const override {
    if (d.sign() <= 0) return 1;
    // 2^-n vs m 2^-e  <=>  2^e vs m 2^n
    const mpz_class e(static_cast<unsigned long>(d.exponent()));
    const mpz_class bits(static_cast<unsigned long>(mpz_sizeinbase(d.mantissa().get_mpz_t(), 2)));
    if (n > e + bits) return -1;
    const Dyadic lhs = Dyadic::pow2_neg(n.get_ui());
    return lhs < d ? -1 : (lhs == d ? 0 : 1);
  }
  std::optional<mpq_class> value(const mpz_class& n) const override {
    if (!fits_small(n)) return std::nullopt;
    return Dyadic::pow2_neg(n.get_ui()).to_mpq();
  }
  std::string describe(const mpz_class& n) const override { return "2^-" + n.get_str(); }
  std::string name() const override { return "2^-n"; }
};

class InverseRate : public RateOracle {
 public:
  explicit InverseRate(unsigned long shift) : shift_(shift) {}
  int compare(const mpz_class& n, const Dyadic& d) const override {
    if (d.sign() <= 0) return 1;
    // 1/(n+c) vs m 2^-e  <=>  2^e vs m (n+c)
    mpz_class lhs;
    mpz_ui_pow_ui(lhs.get_mpz_t(), 2, d.exponent());
    return -sgn(d.mantissa() * (n + shift_) - lhs);
  }
  std::optional<mpq_class> value(const mpz_class& n) const override {
    mpq_class q(1, n + shift_);
    q.canonicalize();
    return q;
  }
  std::string describe(const mpz_class& n) const override {
    return "1/" + mpz_class(n + shift_).get_str();
  }
  std::string name() const override { return "1/(n+" + std::to_string(shift_) + ")"; }

 private:
  unsigned long shift_;
};

class ZeroRate : public RateOracle {
 public:
  int compare(const mpz_class&, const Dyadic& d) const override { return -d.sign(); }
  std::optional<mpq_class> value(const mpz_class&) const override { return mpq_class(0); }
  std::string describe(const mpz_class&) const override { return "0"; }
  std::string name() const override { return "0"; }
};

class TableRate : public RateOracle {
 public:
  explicit TableRate(std::vector<mpq_class> values) : values_(std::move(values)) {}
  const mpq_class& at(const mpz_class& n) const {
    if (n < 1) return values_.front();
    if (n >= values_.size()) return values_.back();
    return values_[n.get_ui() - 1];
  }
  int compare(const mpz_class& n, const Dyadic& d) const override {
    return sgn(at(n) - d.to_mpq());
  }
  std::optional<mpq_class> value(const mpz_class& n) const override { return at(n); }
  std::string describe(const mpz_class& n) const override { return at(n).get_str(); }
  std::string name() const override {
    std::string s = "table:";
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (i) s += ',';
      s += values_[i].get_str();
    }
    return s;
  }

 private:
  std::vector<mpq_class> values_;
};

}  // namespace

std::unique_ptr<RateOracle> parse_rate(std::string_view spec) {
  std::string s;
  for (char c : spec) {
    if (c != ' ') s.push_back(c);
  }
  if (s == "2^-n" || s == "2^(-n)") return std::make_unique<PowerRate>();
  if (s == "0") return std::make_unique<ZeroRate>();
  if (s.rfind("1/(n+", 0) == 0 && s.back() == ')') {
    const std::string c = s.substr(5, s.size() - 6);
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(c, &used);
      if (used == c.size() && v >= 1) return std::make_unique<InverseRate>(v);
    } catch (const std::exception&) {
    }
    throw PreconditionError("rate: bad shift in '" + s + "'");
  }
  if (s.rfind("table:", 0) == 0) {
    std::vector<mpq_class> values;
    std::stringstream ss(s.substr(6));
    std::string item;
    while (std::getline(ss, item, ',')) {
      mpq_class q;
      if (q.set_str(item, 10) != 0) throw PreconditionError("rate: bad value '" + item + "'");
      q.canonicalize();
      values.push_back(q);
    }
    if (values.empty()) throw PreconditionError("rate: empty table");
    return std::make_unique<TableRate>(std::move(values));
  }
  throw PreconditionError("rate: unknown form '" + s +
                          "' (expected 2^-n, 1/(n+C), 0 or table:...)");
}

mpz_class certificate_length(const KSequence& k, std::size_t n) {
  if (n < 1 || n >= k.size()) throw PreconditionError("certificate_length: bad stage");
  if (k[n] < n + 2) return 1;
  mpz_class h;
  mpz_ui_pow_ui(h.get_mpz_t(), 2, k[n] - n - 2);
  return h;
}

KSequence choose_k_for_rate(const RateOracle& r, std::size_t stages) {
  constexpr std::uint64_t kSearchLimit = 4096;
  std::vector<std::uint64_t> k{1};
  std::optional<mpq_class> previous;
  for (std::size_t n = 1; n <= stages; ++n) {
    const Dyadic target = Dyadic::pow2_neg(n + 2);
    std::optional<std::uint64_t> found;
    for (std::uint64_t t = n + 1; t <= n + 1 + kSearchLimit; ++t) {
      mpz_class h = 1;
      if (t > n + 2) mpz_ui_pow_ui(h.get_mpz_t(), 2, t - n - 2);
      if (r.compare(h, target) < 0) {
        found = t;
        break;
      }
    }
    if (!found) {
      throw PreconditionError("choose_k_for_rate: r stays above 2^-" + std::to_string(n + 2));
    }
    k.push_back(std::max<std::uint64_t>(k.back() + n, *found));
    // Monotonicity spot check at the certificate lengths.
    mpz_class h = 1;
    if (k.back() >= n + 2) mpz_ui_pow_ui(h.get_mpz_t(), 2, k.back() - n - 2);
    if (auto v = r.value(h)) {
      if (previous && *v > *previous) {
        throw PreconditionError("choose_k_for_rate: rate oracle is not decreasing at n = " +
                                h.get_str());
      }
      previous = v;
    }
  }
  return KSequence(std::move(k));
}

SlowRateCertificate slowrate_certificate(const Process& p, std::size_t n, const RateOracle* r) {
  if (p.kind() != ProcessKind::theorem2) {
    throw PreconditionError("slowrate_certificate needs a theorem2 process");
  }
  KSequence k(p.k_sequence());
  SlowRateCertificate cert;
  cert.n = n;
  cert.h_prime = certificate_length(k, n);
  cert.lower_bound = Dyadic::pow2_neg(n + 2);

  // Witness: the top part of C_n is A_n(k_n - n - 1), labelled 0^h; its
  // first h' levels start orbits with 0^h' and have measure >= 2^-(n+2).
  const Column& top = p.stage(n).parts().back();
  const Column& slab = top.kind() == Column::Kind::doubled ? top.child() : top;
  const mpz_class& h = top.height();
  bool ok = slab.kind() == Column::Kind::base && slab.slab() == a_interval(n);
  ok = ok && top.label().count_occurrences("0") == h;
  ok = ok && 2 * cert.h_prime - 1 <= h;
  ok = ok && p.width(n) * cert.h_prime >= cert.lower_bound;
  cert.witness_ok = ok;
  cert.pass = ok;
  if (r) {
    cert.r_of_h_prime = r->describe(cert.h_prime);
    cert.pass = ok && r->compare(cert.h_prime, cert.lower_bound) < 0;
  }
  return cert;
}

}  // namespace cutstack

#include "oracles.hpp"

#include <algorithm>

namespace oracle {

std::string FlatColumn::label() const {
  std::string s;
  const mpq_class half(1, 2);
  for (const auto& [lo, hi] : levels) s.push_back(hi <= half ? '0' : '1');
  return s;
}

FlatColumn base(const mpq_class& lo, const mpq_class& hi) {
  mpq_class a = lo;
  mpq_class b = hi;
  a.canonicalize();
  b.canonicalize();
  return FlatColumn{{{a, b}}};
}

FlatColumn stack(const FlatColumn& a, const FlatColumn& b) {
  FlatColumn c = a;
  c.levels.insert(c.levels.end(), b.levels.begin(), b.levels.end());
  return c;
}

FlatColumn cut_and_stack(const FlatColumn& c) {
  FlatColumn left;
  FlatColumn right;
  for (const auto& [lo, hi] : c.levels) {
    mpq_class mid = (lo + hi) / 2;
    left.levels.emplace_back(lo, mid);
    right.levels.emplace_back(mid, hi);
  }
  return stack(left, right);
}

FlatColumn doubled(FlatColumn c, unsigned n) {
  for (unsigned i = 0; i < n; ++i) c = cut_and_stack(c);
  return c;
}

std::vector<FlatColumn> theorem2_stages(const std::vector<std::uint64_t>& k, std::size_t n) {
  std::vector<FlatColumn> out{base(mpq_class(1, 2), mpq_class(1))};
  for (std::size_t i = 1; i <= n; ++i) {
    mpq_class lo(1, 1);
    lo /= mpz_class(1) << (i + 1);
    mpq_class hi = lo * 2;
    FlatColumn a = doubled(base(lo, hi), static_cast<unsigned>(k[i] - (i + 1)));
    out.push_back(stack(doubled(out.back(), static_cast<unsigned>(k[i] - k[i - 1])), a));
  }
  return out;
}

std::size_t locate(const FlatColumn& c, const mpq_class& p) {
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    if (c.levels[i].first <= p && p < c.levels[i].second) return i + 1;
  }
  return 0;
}

std::size_t count(const std::string& s, const std::string& pattern) {
  if (pattern.size() > s.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + pattern.size() <= s.size(); ++i) {
    if (s.compare(i, pattern.size(), pattern) == 0) ++n;
  }
  return n;
}

std::vector<Interval> union_of(const std::vector<Interval>& ivs) {
  std::vector<Interval> v = ivs;
  std::sort(v.begin(), v.end());
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      mpq_class lo = std::max(x.first, y.first);
      mpq_class hi = std::min(x.second, y.second);
      if (lo < hi) out.emplace_back(lo, hi);
    }
  }
  return union_of(out);
}

mpq_class measure(const std::vector<Interval>& s) {
  mpq_class m = 0;
  for (const auto& [lo, hi] : s) m += hi - lo;
  return m;
}

mpq_class b_intersection(const std::vector<FlatColumn>& stages,
                         const std::vector<std::uint64_t>& k, std::size_t n) {
  std::vector<Interval> acc = union_of(stages[0].levels);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t top = ((std::size_t{1} << (k[i] - k[i - 1])) - 1) * stages[i - 1].height();
    std::vector<Interval> b(stages[i].levels.begin(), stages[i].levels.begin() + top);
    acc = intersect(acc, union_of(b));
  }
  return measure(acc);
}

mpq_class q(const cutstack::Dyadic& d) { return d.to_mpq(); }

}  // namespace oracle

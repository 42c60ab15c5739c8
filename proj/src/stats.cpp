#include "cutstack/stats.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cutstack/error.hpp"

namespace cutstack {

std::size_t count_window(std::string_view bits, std::string_view x) {
  if (x.empty()) return bits.size() + 1;
  if (x.size() > bits.size()) return 0;
  std::size_t n = 0;
  for (std::size_t pos = bits.find(x); pos != std::string_view::npos;
       pos = bits.find(x, pos + 1)) {
    ++n;
  }
  return n;
}

mpq_class empirical_freq(std::string_view bits, std::string_view x) {
  if (x.empty()) throw PreconditionError("empirical_freq: empty pattern");
  if (bits.size() < x.size()) {
    throw PreconditionError("empirical_freq: input shorter than pattern");
  }
  mpq_class q(static_cast<unsigned long>(count_window(bits, x)),
              static_cast<unsigned long>(bits.size() - x.size() + 1));
  q.canonicalize();
  return q;
}

ConfidenceInterval wilson(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

// Distance from q to [lo, hi] is at least 1/k.
bool deviates(const mpq_class& q, const mpq_class& lo, const mpq_class& hi,
              const mpq_class& tol) {
  if (q < lo) return lo - q >= tol;
  if (q > hi) return q - hi >= tol;
  return false;
}

}  // namespace

std::vector<CurvePoint> rate_curve(const Process& p, const Enclosure& truth,
                                   const RateCurveConfig& cfg) {
  if (cfg.x.empty()) throw PreconditionError("rate_curve: empty pattern");
  if (cfg.k < 1) throw PreconditionError("rate_curve: k must be at least 1");
  if (cfg.lengths.empty()) throw PreconditionError("rate_curve: no lengths");
  std::vector<std::uint64_t> lengths = cfg.lengths;
  for (auto n : lengths) {
    if (n < cfg.x.size()) throw PreconditionError("rate_curve: length shorter than pattern");
  }
  const std::uint64_t max_len = *std::max_element(lengths.begin(), lengths.end());
  const mpq_class lo = truth.lo.to_mpq();
  const mpq_class hi = truth.hi.to_mpq();
  const mpq_class tol(1, cfg.k);
  const std::size_t m = cfg.x.size();

  std::vector<std::vector<std::uint64_t>> hits(std::max(1u, cfg.jobs),
                                               std::vector<std::uint64_t>(lengths.size(), 0));
  auto worker = [&](unsigned w, unsigned stride) {
    for (std::uint64_t t = w; t < cfg.trials; t += stride) {
      const auto s = p.sample_orbit(cfg.seed + t, max_len, cfg.sample_stage);
      for (std::size_t li = 0; li < lengths.size(); ++li) {
        const std::string_view prefix(s.bits.data(), lengths[li]);
        const std::size_t c = m == 1 ? static_cast<std::size_t>(
                                           std::count(prefix.begin(), prefix.end(), cfg.x[0]))
                                     : count_window(prefix, cfg.x);
        mpq_class q(static_cast<unsigned long>(c),
                    static_cast<unsigned long>(lengths[li] - m + 1));
        q.canonicalize();
        if (deviates(q, lo, hi, tol)) ++hits[w][li];
      }
    }
  };
  const unsigned jobs = std::max(1u, cfg.jobs);
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w, jobs);
    for (auto& th : pool) th.join();
  }

  std::vector<CurvePoint> out;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    CurvePoint pt;
    pt.length = lengths[li];
    pt.trials = cfg.trials;
    for (const auto& h : hits) pt.deviations += h[li];
    pt.fraction = cfg.trials ? static_cast<double>(pt.deviations) / cfg.trials : 0;
    pt.ci = wilson(pt.deviations, pt.trials, cfg.z);
    out.push_back(pt);
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "length,deviation_fraction,ci_lo,ci_hi\n";
  for (const auto& pt : curve) {
    out << pt.length << ',' << pt.fraction << ',' << pt.ci.lo << ',' << pt.ci.hi << '\n';
  }
}

}  // namespace cutstack

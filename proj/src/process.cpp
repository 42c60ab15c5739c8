#include "cutstack/process.hpp"

#include <random>

#include "cutstack/error.hpp"

namespace cutstack {

const char* to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::theorem2:
      return "theorem2";
    case ProcessKind::adversary:
      return "adversary";
  }
  return "?";
}

Process::Process(ProcessKind kind, std::vector<std::uint64_t> k, std::vector<Column> stages)
    : kind_(kind), k_(std::move(k)), stages_(std::move(stages)) {
  if (stages_.empty() || stages_.size() != k_.size()) {
    throw PreconditionError("process: need one k per stage and at least one stage");
  }
  for (std::size_t n = 0; n < stages_.size(); ++n) {
    if (stages_[n].width() != Dyadic::pow2_neg(k_[n])) {
      throw PreconditionError("process: stage " + std::to_string(n) + " width " +
                              stages_[n].width().to_string() + " != 2^-" +
                              std::to_string(k_[n]));
    }
    if (!stages_[n].compatible()) {
      throw PreconditionError("process: stage " + std::to_string(n) + " not compatible");
    }
    if (n == 0) continue;
    if (k_[n] <= k_[n - 1]) {
      throw PreconditionError("process: widths must strictly decrease");
    }
    for (const auto& iv : stages_[n - 1].support()) {
      if (!stages_[n].support_contains(iv.lower()) ||
          stages_[n].support_measure() < stages_[n - 1].support_measure()) {
        throw PreconditionError("process: supports not nested at stage " +
                                std::to_string(n));
      }
    }
  }
}

const Column& Process::stage(std::size_t n) const {
  if (n >= stages_.size()) {
    throw PreconditionError("stage " + std::to_string(n) + " not built (last is " +
                            std::to_string(last_stage()) + ")");
  }
  return stages_[n];
}

std::optional<Location> Process::locate(const Dyadic& xi, std::size_t n) const {
  if (xi < Dyadic(0) || !(xi < Dyadic(1))) {
    throw PreconditionError("locate: point must lie in [0, 1)");
  }
  return stage(n).locate(xi);
}

std::string Process::emit_symbols(const Dyadic& xi, std::size_t len) const {
  std::size_t used = 0;
  return emit_symbols(xi, len, used);
}

std::string Process::emit_symbols(const Dyadic& xi, std::size_t len,
                                  std::size_t& stage_used) const {
  std::size_t n = 0;
  while (n <= last_stage() && !stage(n).support_contains(xi)) ++n;
  if (n > last_stage()) {
    throw PreconditionError("emit_symbols: " + xi.to_string() + " outside every support");
  }
  stage_used = n;
  if (len == 0) return {};
  for (; n <= last_stage(); ++n) {
    auto loc = stage(n).locate(xi);
    if (loc->level + len - 1 <= height(n)) {
      stage_used = n;
      return label(n).extract(loc->level, len);
    }
  }
  throw InsufficientStages("emit_symbols: " + std::to_string(len) +
                           " symbols need more than " + std::to_string(last_stage() + 1) +
                           " stages");
}

Dyadic Process::draw_start(std::uint64_t seed, std::size_t sample_stage) const {
  const Column& c = stage(sample_stage);
  const std::uint64_t bits = k(sample_stage) + kExtraStartBits;
  if (bits > kMaxStartBits) {
    throw BudgetError("sample_orbit: stage " + std::to_string(sample_stage) + " needs " +
                      std::to_string(bits) + " random bits, cap is " +
                      std::to_string(kMaxStartBits));
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1 << 20; ++attempt) {
    mpz_class m = 0;
    for (std::uint64_t done = 0; done < bits; done += 64) {
      std::uint64_t word = rng();
      const std::uint64_t take = std::min<std::uint64_t>(64, bits - done);
      if (take < 64) word >>= (64 - take);
      m <<= take;
      m += mpz_class(static_cast<unsigned long>(word));
    }
    Dyadic xi(m, bits);
    if (c.support_contains(xi)) return xi;
  }
  throw BudgetError("sample_orbit: rejection sampling failed to hit the support");
}

std::size_t Process::default_sample_stage() const {
  return last_stage() > 0 ? last_stage() - 1 : 0;
}

OrbitSample Process::sample_orbit(std::uint64_t seed, std::size_t len,
                                  std::optional<std::size_t> sample_stage) const {
  if (len < 1) throw PreconditionError("sample_orbit: length must be at least 1");
  OrbitSample s;
  s.seed = seed;
  s.sampled_stage = sample_stage.value_or(default_sample_stage());
  s.start = draw_start(seed, s.sampled_stage);
  s.bits = emit_symbols(s.start, len, s.stage_used);
  s.tv_bound = Dyadic(1) - support_measure(s.sampled_stage);
  return s;
}

Dyadic Process::block_prob(std::size_t n, std::string_view x, std::size_t pattern_cap) const {
  const Column& c = stage(n);
  if (x.empty()) return c.support_measure();
  if (x.size() > pattern_cap) {
    throw PreconditionError("block_prob: pattern length " + std::to_string(x.size()) +
                            " exceeds cap " + std::to_string(pattern_cap));
  }
  if (c.height() < x.size()) return Dyadic(0);
  return c.width() * c.label().count_occurrences(x, pattern_cap);
}

Enclosure Process::enclosure_at(std::string_view x, std::size_t n,
                                std::size_t pattern_cap) const {
  Enclosure e;
  e.x = std::string(x);
  e.stage = n;
  e.lo = block_prob(n, x, pattern_cap);
  e.hi = e.lo + (Dyadic(1) - support_measure(n));
  if (!x.empty()) e.hi += width(n) * mpz_class(static_cast<unsigned long>(x.size() - 1));
  return e;
}

Enclosure Process::block_prob_limit(std::string_view x, const Dyadic& eps,
                                    std::size_t pattern_cap) const {
  if (kind_ != ProcessKind::theorem2) {
    throw PreconditionError("block_prob_limit needs a full-measure (theorem2) process");
  }
  if (eps.sign() <= 0) throw PreconditionError("block_prob_limit: eps must be positive");
  for (std::size_t n = 0; n <= last_stage(); ++n) {
    // Both correction terms are known before counting.
    Dyadic slack = (Dyadic(1) - support_measure(n));
    if (!x.empty()) slack += width(n) * mpz_class(static_cast<unsigned long>(x.size() - 1));
    if (slack <= eps) return enclosure_at(x, n, pattern_cap);
  }
  throw BudgetError("block_prob_limit: stage budget " + std::to_string(last_stage()) +
                    " exhausted before width " + eps.to_string());
}

std::vector<mpq_class> Process::entropy_profile() const {
  std::vector<mpq_class> out;
  out.reserve(stages_.size());
  for (std::size_t n = 0; n <= last_stage(); ++n) {
    mpq_class v(mpz_class(static_cast<unsigned long>(k(n))), height(n));
    v.canonicalize();
    out.push_back(v);
  }
  return out;
}

}  // namespace cutstack

#include "cutstack/ryabko.hpp"

#include <cmath>
#include <random>

#include "cutstack/error.hpp"

namespace cutstack {

void RyabkoSpec::validate() const {
  if (p.empty()) throw PreconditionError("ryabko: empty p sequence");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < 0 || p[j] > 1) {
      throw PreconditionError("ryabko: p_" + std::to_string(j + 1) + " = " + p[j].get_str() +
                              " outside [0, 1]");
    }
    if (!p[j].get_den().fits_ulong_p()) {
      throw PreconditionError("ryabko: denominator of p_" + std::to_string(j + 1) +
                              " too large");
    }
  }
}

const mpq_class& RyabkoSpec::at(std::size_t j) const {
  if (j >= 1 && j <= p.size()) return p[j - 1];
  if (j > p.size() && overflow == Overflow::repeat_last) return p.back();
  throw BudgetError("ryabko: chain reached state " + std::to_string(j) + " but only " +
                    std::to_string(p.size()) + " probabilities were given");
}

std::string sample_ryabko(const RyabkoSpec& spec, std::uint64_t seed, std::size_t len) {
  if (len < 1) throw PreconditionError("sample_ryabko: length must be at least 1");
  spec.validate();
  std::mt19937_64 rng(seed);
  std::string out;
  out.reserve(len);
  std::size_t y = 0;
  for (std::size_t t = 0; t < len; ++t) {
    if (t > 0) y = (rng() & 1) ? y + 1 : 0;
    if (y == 0) {
      out.push_back('0');
      continue;
    }
    const mpq_class& pj = spec.at(y);
    const std::uint64_t den = pj.get_den().get_ui();
    const std::uint64_t num = pj.get_num().get_ui();
    std::uniform_int_distribution<std::uint64_t> u(0, den - 1);
    out.push_back(u(rng) < num ? '1' : '2');
  }
  return out;
}

std::vector<std::size_t> extract_Ij(std::string_view bits, std::size_t j) {
  std::vector<std::size_t> out;
  // next_zero[i]: distance scan done backwards via the last zero seen.
  std::size_t next_zero = bits.size();
  std::vector<std::size_t> nz(bits.size());
  for (std::size_t i = bits.size(); i-- > 0;) {
    nz[i] = next_zero;
    if (bits[i] == '0') next_zero = i;
  }
  for (std::size_t i = 0; i + j < bits.size(); ++i) {
    if (bits[i] == '0' && nz[i] > i + j) out.push_back(i + 1);
  }
  return out;
}

std::uint64_t ryabko_sample_size(std::uint64_t k) {
  if (k < 1) throw PreconditionError("ryabko: k must be at least 1");
  const double kk = static_cast<double>(k);
  return static_cast<std::uint64_t>(std::ceil(2 * kk * kk * std::log(20 * kk)));
}

PjEstimate estimate_pj(std::string_view bits, std::size_t j, std::uint64_t k) {
  if (j < 1) throw PreconditionError("estimate_pj: j must be at least 1");
  PjEstimate est;
  est.samples_needed = ryabko_sample_size(k);
  std::uint64_t ones = 0;
  for (std::size_t i : extract_Ij(bits, j)) {
    const std::size_t pos = i + j;  // 1-based
    ++est.samples_seen;
    if (bits[pos - 1] == '1') ++ones;
    if (est.samples_seen == est.samples_needed) {
      est.value = mpq_class(static_cast<unsigned long>(ones),
                            static_cast<unsigned long>(est.samples_needed));
      est.value->canonicalize();
      est.prefix_used = pos;
      break;
    }
  }
  return est;
}

}  // namespace cutstack

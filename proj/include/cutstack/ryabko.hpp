#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace cutstack {

// Markov chain Y on {0, 1, 2, ...}: from any state, go to 0 or to the next
// state with probability 1/2 each. X = 0 at state 0; at state j >= 1, X = 1
// with probability p_j and X = 2 otherwise.
struct RyabkoSpec {
  enum class Overflow { fail, repeat_last };
  std::vector<mpq_class> p;  // p_1, p_2, ...
  Overflow overflow = Overflow::fail;

  // Throws PreconditionError unless every p_j is in [0, 1] and p is nonempty.
  void validate() const;
  const mpq_class& at(std::size_t j) const;  // p_j, honouring the overflow policy
};

// X_1..X_L as '0'/'1'/'2', Y started at 0. Throws BudgetError when the chain
// reaches a state beyond p and the policy is fail.
std::string sample_ryabko(const RyabkoSpec& spec, std::uint64_t seed, std::size_t len);

// {i : X_i = 0 and X_t != 0 for i < t <= i + j}, 1-based, with i + j <= |bits|.
std::vector<std::size_t> extract_Ij(std::string_view bits, std::size_t j);

// ceil(2 k^2 ln(20 k)): with that many samples a Hoeffding bound gives
// failure probability at most 1/(10 k^2) for precision 1/k.
std::uint64_t ryabko_sample_size(std::uint64_t k);

struct PjEstimate {
  std::optional<mpq_class> value;  // nullopt: not yet
  std::uint64_t samples_needed = 0;
  std::size_t samples_seen = 0;
  std::size_t prefix_used = 0;  // shortest prefix fixing the value
};

// Frequency of '1' among X_{i+j}, i in I_j, frozen at the first
// ryabko_sample_size(k) indices.
PjEstimate estimate_pj(std::string_view bits, std::size_t j, std::uint64_t k);

}  // namespace cutstack

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "cutstack/dyadic.hpp"
#include "cutstack/process.hpp"

namespace cutstack {

// k_0 = 1 < k_1 < k_2 < ... (finite prefix).
class KSequence {
 public:
  explicit KSequence(std::vector<std::uint64_t> values);

  // k_i = k_{i-1} + i, the smallest sequence meeting the gap condition.
  static KSequence gap_sequence(std::size_t last);

  const std::vector<std::uint64_t>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t operator[](std::size_t i) const { return values_.at(i); }

  // k_i - k_{i-1} >= i for every i in the prefix.
  bool gap_condition() const;

  friend bool operator==(const KSequence&, const KSequence&) = default;

 private:
  std::vector<std::uint64_t> values_;
};

// C_0 = X^1, C_n = C_{n-1}(k_n - k_{n-1}) * A_n(k_n - (n+1)), for n = 1..stages.
Process build_theorem2(const KSequence& k, std::size_t stages);

// A_n = [2^-(n+1), 2^-n).
DyadicInterval a_interval(std::uint64_t n);
DyadicInterval x1_interval();

// f(n) = sum_{i=1}^n 2^(k_i - (i+1)); f(0) = 0.
mpz_class zero_run_length(const KSequence& k, std::size_t n);

enum class RunKind { zero_run, one_run };

// zero_run: P(1 0^m 1) = 2^-k_n - 2^-k_{n+1} for m = f(n), else 0;
// one_run: P(0 1^m 0) = 2^-k_1 for m = 2^(k_1-1), else 0; m >= 1.
Dyadic closed_form(const KSequence& k, RunKind kind, const mpz_class& m);

// lambda(B_0 ∩ ... ∩ B_n) = (1/2) prod_{i=1}^n (1 - 2^-(k_i - k_{i-1})).
Dyadic b_intersection_measure(const KSequence& k, std::size_t n);

// Under the gap condition the full intersection is at least
// partial * (1 - 2^-n) > 0; nullopt when the gap condition fails.
std::optional<Dyadic> b_limit_lower_bound(const KSequence& k);

struct StarViolation {
  std::size_t position = 0;  // 0-based index of the pattern's first symbol
  std::string what;
};

struct StarReport {
  bool pass = true;
  std::vector<StarViolation> violations;
  // Patterns 1 0^a 1 with a beyond f(last built index); cannot be judged.
  std::size_t undecided = 0;
  // Set: the stricter check for probability-zero run patterns was applied.
  bool strict_patterns = true;
};

StarReport star_check(std::string_view bits, const KSequence& k);

// Pairs (i, k_i) recovered so far, as a prefix k_0..k_{t-1}.
struct KTable {
  std::vector<std::uint64_t> k;
  bool consistent = true;
  std::string diagnostic;
};

// Streaming decoder from orbit symbols to the K-table. Feeding symbols one
// at a time never removes a recovered pair.
class KRecovery {
 public:
  // Returns true when the table grew.
  bool push(char symbol);
  const KTable& table() const { return table_; }
  std::size_t consumed() const { return consumed_; }

 private:
  bool on_zero_run(std::uint64_t a);
  bool on_one_run(std::uint64_t b);
  bool fail(std::string why);
  void seed_k0();

  KTable table_;
  std::vector<mpz_class> f_;  // f(0..t-1)
  char last_ = 0;
  bool run_bounded_ = false;  // current run is preceded by the other symbol
  std::uint64_t run_ = 0;
  std::size_t consumed_ = 0;
};

KTable recover_k(std::string_view bits);

// Recovery over a whole input, remembering where each pair became known.
struct KRecoveryTrace {
  KTable table;
  std::vector<std::size_t> found_at;  // prefix length at which pair i appeared
  std::optional<std::size_t> inconsistent_at;
};

KRecoveryTrace recover_k_trace(std::string_view bits);

struct GEstimate {
  std::optional<mpq_class> value;  // nullopt: not yet
  std::size_t pairs_used = 0;
  std::size_t prefix_used = 0;  // shortest prefix at which the value is defined
};

// The K-recovery estimator: defined once the recovered prefix makes the
// stage enclosure narrower than 1/k; returns its midpoint. Throws
// InconsistentInput when the input is inconsistent before that point.
GEstimate g_estimate(std::string_view x, std::uint64_t k, std::string_view bits);
GEstimate g_estimate(std::string_view x, std::uint64_t k, const KRecoveryTrace& trace);

// Enclosure of P(x) for the theorem2 process built from k_0..k_n, clipped to
// [0, 1]; g_estimate answers once its width is at most 1/k.
Enclosure g_enclosure(std::string_view x, const KSequence& k);

// Computable convergence-rate bound r(n).
class RateOracle {
 public:
  virtual ~RateOracle() = default;
  // sign(r(n) - d).
  virtual int compare(const mpz_class& n, const Dyadic& d) const = 0;
  // Exact value when representable at moderate size.
  virtual std::optional<mpq_class> value(const mpz_class& n) const = 0;
  virtual std::string describe(const mpz_class& n) const = 0;
  virtual std::string name() const = 0;
};

// "2^-n", "1/(n+C)", "0" or "table:v1,v2,..." (values for n = 1, 2, ...; the
// last value holds afterwards).
std::unique_ptr<RateOracle> parse_rate(std::string_view spec);

// k_n = max(k_{n-1} + n, smallest t with 2^-(n+2) > r(h'(t))), h'(t) =
// max(1, 2^(t-n-2)). Throws PreconditionError if r is seen increasing.
KSequence choose_k_for_rate(const RateOracle& r, std::size_t stages);

// h' = max(1, 2^(k_n - n - 2)).
mpz_class certificate_length(const KSequence& k, std::size_t n);

struct SlowRateCertificate {
  std::size_t n = 0;
  mpz_class h_prime;
  Dyadic lower_bound;  // 2^-(n+2) <= P(0^h')
  std::string r_of_h_prime;
  bool witness_ok = false;  // bottom levels of A_n(k_n - n - 1) checked
  bool pass = false;        // witness_ok and lower_bound > r(h')
};

SlowRateCertificate slowrate_certificate(const Process& p, std::size_t n,
                                         const RateOracle* r = nullptr);

}  // namespace cutstack

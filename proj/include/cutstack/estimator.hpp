#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "cutstack/process.hpp"

namespace cutstack {

struct Evaluation {
  enum class Status { defined, not_yet, budget_exhausted };
  Status status = Status::not_yet;
  mpq_class value;
  std::uint64_t steps = 0;

  bool defined() const { return status == Status::defined; }
};

const char* to_string(Evaluation::Status s);

// Smallest k found for an f-hat claim and the value returned there.
struct FHatHit {
  std::uint64_t k = 0;
  mpq_class value;
};

// Partial map (x, k, y) -> rational, prefix-stable in y. Implementations
// must be safe to call from one thread at a time per instance.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual std::string tag() const = 0;
  virtual Evaluation evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                              std::uint64_t step_budget) const = 0;

  // Declared lower bound on every value returned; lets f-hat searches skip
  // precisions that cannot succeed.
  virtual std::optional<mpq_class> value_floor() const { return std::nullopt; }

  // Smallest k in [k_lo, k_hi] with f(0^m, k, y) defined within the step
  // budget and f + 1/k < bound. The default scans evaluate().
  virtual std::optional<FHatHit> first_claim(std::size_t m, std::string_view y,
                                             const mpq_class& bound, std::uint64_t k_lo,
                                             std::uint64_t k_hi,
                                             std::uint64_t step_budget) const;
};

using EstimatorPtr = std::shared_ptr<const Estimator>;

// f == value everywhere.
class ConstantEstimator : public Estimator {
 public:
  explicit ConstantEstimator(mpq_class value);
  std::string tag() const override;
  Evaluation evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                      std::uint64_t step_budget) const override;
  std::optional<mpq_class> value_floor() const override { return value_; }

 private:
  mpq_class value_;
};

// G(k, |x|) = scale * k^k_pow * |x|^len_pow * 2^(exp2_len * |x|).
struct GrowthRule {
  std::uint64_t scale = 1;
  unsigned k_pow = 2;
  unsigned len_pow = 0;
  unsigned exp2_len = 1;

  // nullopt when the value does not fit in 64 bits.
  std::optional<std::uint64_t> operator()(std::uint64_t k, std::size_t len) const;
  std::string describe() const;

  static GrowthRule quadratic_exponential() { return {1, 2, 0, 1}; }  // k^2 * 2^|x|
  static GrowthRule linear() { return {1, 1, 1, 0}; }                 // k * |x|
  // "k^2*2^|x|" | "k*|x|" | "default" | "linear".
  static GrowthRule parse(std::string_view name);

  friend bool operator==(const GrowthRule&, const GrowthRule&) = default;
};

// Waits for |y| >= max(G(k, |x|), |x|), then returns the empirical frequency
// of x on that prefix; the answer is frozen from there on.
class EmpiricalEstimator : public Estimator {
 public:
  explicit EmpiricalEstimator(GrowthRule rule = GrowthRule::quadratic_exponential());
  std::string tag() const override;
  const GrowthRule& rule() const { return rule_; }
  Evaluation evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                      std::uint64_t step_budget) const override;
  std::optional<mpq_class> value_floor() const override { return mpq_class(0); }
  std::optional<FHatHit> first_claim(std::size_t m, std::string_view y, const mpq_class& bound,
                                     std::uint64_t k_lo, std::uint64_t k_hi,
                                     std::uint64_t step_budget) const override;

 private:
  GrowthRule rule_;
};

// Ignores y; returns the midpoint of an enclosure of width <= 1/(2k) on
// a fixed theorem2 process.
class OracleEstimator : public Estimator {
 public:
  explicit OracleEstimator(std::shared_ptr<const Process> p);
  std::string tag() const override;
  Evaluation evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                      std::uint64_t step_budget) const override;
  std::optional<mpq_class> value_floor() const override { return mpq_class(0); }
  const Process& process() const { return *p_; }

 private:
  std::shared_ptr<const Process> p_;
};

// External estimator over a pipe: writes "EST x k y\n" and expects
// "VAL p/q\n" or "NOTYET\n". The child is started lazily and kept alive.
class SubprocessEstimator : public Estimator {
 public:
  explicit SubprocessEstimator(std::vector<std::string> argv);
  ~SubprocessEstimator() override;
  SubprocessEstimator(const SubprocessEstimator&) = delete;
  SubprocessEstimator& operator=(const SubprocessEstimator&) = delete;

  std::string tag() const override;
  Evaluation evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                      std::uint64_t step_budget) const override;

 private:
  void start() const;
  void stop() const;

  std::vector<std::string> argv_;
  mutable std::mutex mu_;
  mutable int pid_ = -1;
  mutable int to_child_ = -1;
  mutable int from_child_ = -1;
  mutable std::string pending_;
};

// One protocol exchange, exposed for testing: parses a response line.
Evaluation parse_estimator_reply(std::string_view line);

struct FHatQuery {
  std::uint64_t n = 0;  // claim: P(0^m) < 2^-(n+2)
  std::size_t m = 1;
  std::string_view y;
  std::uint64_t k_budget = 16;
  std::uint64_t m_budget = 4096;
  std::uint64_t step_budget = 1'000'000;
};

// First k <= k_budget with f(0^m, k, y) + 1/k < 2^-(n+2). By prefix
// stability a claim at any prefix of y is a claim at y, so y itself is
// evaluated. Budget exhaustion counts as no claim.
std::optional<FHatHit> fhat_search(const Estimator& f, const FHatQuery& q);
bool fhat_member(const Estimator& f, const FHatQuery& q);

// Randomized prefix-stability test: for each (x, k) pair, extends y at random
// and checks that a defined answer never changes. Returns the number of
// violations found.
std::size_t prefix_stability_violations(const Estimator& f,
                                        const std::vector<std::pair<std::string, std::uint64_t>>& queries,
                                        std::string_view y, std::size_t extensions,
                                        std::size_t max_extra, std::uint64_t seed,
                                        std::uint64_t step_budget = 1'000'000);

}  // namespace cutstack

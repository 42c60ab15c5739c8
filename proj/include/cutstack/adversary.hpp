#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cutstack/estimator.hpp"
#include "cutstack/process.hpp"

namespace cutstack {

// Cantor pairing <e, i> = (e+i-2)(e+i-1)/2 + e, a bijection from
// {1,2,...}^2 onto {1,2,...}.
std::uint64_t pairing(std::uint64_t e, std::uint64_t i);
std::pair<std::uint64_t, std::uint64_t> unpairing(std::uint64_t code);

struct Budgets {
  std::size_t stages = 8;            // N: stages 1..N are attempted
  std::uint64_t k = 16;              // precisions 1..k tried per f-hat query
  std::uint64_t m = 4096;            // run lengths 1..m tried per code
  std::uint64_t steps = 1'000'000;   // per estimator evaluation
  std::uint64_t suffix_cap = 1 << 14;  // max h(C_{n-1}) evaluated at stage n

  friend bool operator==(const Budgets&, const Budgets&) = default;
};

struct FEntry {
  std::uint64_t code = 0;
  std::uint64_t e = 0;
  std::uint64_t i = 0;
  std::uint64_t m = 0;  // least m with (code, m) in F_n
  std::uint64_t k = 0;  // precision at which the claim was found
  mpq_class value;      // f_e(0^m, k, suffix)

  friend bool operator==(const FEntry&, const FEntry&) = default;
};

struct StageRecord {
  std::size_t n = 0;
  std::uint64_t k = 0;
  // F_n restricted to codes not yet in J, with the least m per code.
  std::vector<FEntry> f;
  // G_n, ascending; each code appears in at most one stage.
  std::vector<std::uint64_t> g;
  std::uint64_t evaluations = 0;

  friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

struct StageTrace {
  std::vector<StageRecord> stages;  // stages[0] is stage 0
  Budgets budgets;
  std::optional<std::string> aborted;  // budget report when construction stopped early

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct FalsificationWitness {
  std::uint64_t e = 0;  // 1-based estimator index
  std::string tag;
  std::uint64_t code = 0;
  std::uint64_t i = 0;
  std::uint64_t m = 0;
  std::uint64_t k = 0;
  mpq_class value;
  std::size_t stage = 0;
  Dyadic claimed_bound;  // 2^-(code+2): f claims P(0^m) below this
  Dyadic proven_lower;   // raw P_stage(0^m), a lower bound on raw P(0^m)
  // Probabilities here are unnormalized (lambda of the event); dividing by
  // lambda(Omega_1) <= 1 only increases them.
  bool normalized = false;

  friend bool operator==(const FalsificationWitness&, const FalsificationWitness&) = default;
};

struct AdversaryRun {
  std::vector<EstimatorPtr> estimators;
  std::shared_ptr<const Process> process;
  StageTrace trace;
  std::vector<FalsificationWitness> witnesses;
};

AdversaryRun build_adversary(std::vector<EstimatorPtr> fs, const Budgets& budgets);

enum class Tri { yes, no, unknown };
const char* to_string(Tri t);

// (n, m) in R, i.e. P(0^m) < 2^-(n+2), from stage lower bounds (and, for a
// full-measure process, the stage tail bound) up to `stage_budget`.
Tri r_member(const Process& p, std::uint64_t n, std::uint64_t m, std::size_t stage_budget);

struct WitnessCheck {
  bool trace_ok = false;
  bool column_ok = false;
  bool measure_ok = false;
  bool prob_ok = false;
  bool fhat_ok = false;
  std::string detail;

  bool ok() const { return trace_ok && column_ok && measure_ok && prob_ok && fhat_ok; }
};

WitnessCheck check_witness(const AdversaryRun& run, const FalsificationWitness& w);
bool verify_witness(const AdversaryRun& run, const FalsificationWitness& w);

struct EntropyStage {
  std::size_t n = 0;
  mpq_class ratio;            // k_n / h_n
  bool height_ok = false;     // h_n >= 2^(k_n - 1)
  bool ratio_ok = false;      // 0 < ratio <= k_n 2^(-k_n+1)
  std::size_t spot_checks = 0;
  bool blocks_ok = false;     // sampled P(alpha_i..alpha_j) >= 2^-k_n
};

struct EntropyReport {
  std::vector<EntropyStage> stages;
  bool pass = true;
};

// Per stage: h_n >= 2^(k_n-1) and, on `samples` random windows of the
// stage label, block_prob >= w(C_n).
EntropyReport adversary_entropy_check(const Process& p, std::size_t samples = 32,
                                      std::uint64_t seed = 1);

// Per-estimator verdict for reports.
struct Verdict {
  std::uint64_t e = 0;
  std::string tag;
  std::size_t witnesses = 0;
  bool verified = false;  // all witnesses re-verify
  std::string status;     // "falsified" | "defeated by silence"
};

std::vector<Verdict> verdicts(const AdversaryRun& run);

}  // namespace cutstack

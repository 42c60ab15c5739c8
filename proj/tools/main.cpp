#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cutstack/adversary.hpp"
#include "cutstack/error.hpp"
#include "cutstack/ryabko.hpp"
#include "cutstack/serialize.hpp"
#include "cutstack/slowrate.hpp"
#include "cutstack/stats.hpp"
#include "cutstack/verify.hpp"

using namespace cutstack;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kBudget = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') {
      throw UsageError("'" + item + "' is not a nonnegative integer");
    }
    out.push_back(v);
  }
  return out;
}

mpq_class parse_rational(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0 || q.get_den() == 0) throw UsageError("bad rational '" + s + "'");
  q.canonicalize();
  return q;
}

// "1/256", "2^-8" or "0.25"-free dyadic forms.
Dyadic parse_dyadic(const std::string& s) {
  if (s.rfind("2^-", 0) == 0) return Dyadic::pow2_neg(parse_u64_list(s.substr(3)).at(0));
  const mpq_class q = parse_rational(s);
  const mpz_class& den = q.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) throw UsageError("'" + s + "' is not dyadic");
  return Dyadic(q.get_num(), mpz_sizeinbase(den.get_mpz_t(), 2) - 1);
}

bool binary(const std::string& x) {
  return x.find_first_not_of("01") == std::string::npos;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

LoadedProcess load_process(const std::string& path) {
  return build_from_spec(spec_from_json(read_json(path)));
}

void print_verdicts(const AdversaryRun& run) {
  std::cerr << std::left << std::setw(4) << "e" << std::setw(22) << "verdict" << std::setw(11)
            << "witnesses" << std::setw(10) << "verified" << "estimator\n";
  for (const auto& v : verdicts(run)) {
    std::cerr << std::setw(4) << v.e << std::setw(22) << v.status << std::setw(11) << v.witnesses
              << std::setw(10) << (v.witnesses ? (v.verified ? "yes" : "NO") : "-") << v.tag
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cutstack: cutting-and-stacking process builder and verifier"};
  app.require_subcommand(1);

  // build
  auto* build = app.add_subcommand("build", "construct a process and save its spec");
  build->require_subcommand(1);
  auto* b_t2 = build->add_subcommand("theorem2", "slow-rate process from a k-sequence or rate");
  std::string k_text, rate_text, out_path;
  std::size_t stages = 0;
  b_t2->add_option("--k", k_text, "k_0,k_1,... (k_0 = 1, strictly increasing)");
  b_t2->add_option("--rate", rate_text, "rate oracle: 2^-n, 1/(n+C), 0 or table:v1,v2,...");
  b_t2->add_option("--stages", stages, "stages to build")->required();
  b_t2->add_option("--out", out_path, "output file (default stdout)");
  auto* b_adv = build->add_subcommand("adversary", "adversary process against estimators");
  std::string est_path, budget_text;
  b_adv->add_option("--estimators", est_path, "JSON array of estimator configs")->required();
  b_adv->add_option("--stages", stages, "stage budget N")->required();
  b_adv->add_option("--budgets", budget_text, "k=..,m=..,steps=..,cap=..");
  b_adv->add_option("--out", out_path, "output file (default stdout)");

  // sample
  auto* sample = app.add_subcommand("sample", "print sampled orbits, one per line");
  std::string proc_path;
  std::uint64_t seed = 1, count = 1;
  std::size_t len = 0;
  std::optional<std::size_t> stage_opt;
  sample->add_option("--process", proc_path)->required();
  sample->add_option("--seed", seed);
  sample->add_option("--len", len)->required();
  sample->add_option("--count", count, "orbits; orbit t uses seed + t");
  sample->add_option("--stage", stage_opt, "draw start points from S(C_stage)");

  // prob
  auto* prob = app.add_subcommand("prob", "enclosure of P(x)");
  std::string x, eps_text;
  prob->add_option("--process", proc_path)->required();
  prob->add_option("--x", x, "binary block (may be empty)");
  prob->add_option("--eps", eps_text, "target width, e.g. 1/256 (theorem2 only)");
  prob->add_option("--stage", stage_opt, "enclosure from this stage instead");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "run the K-recovery estimator on an orbit");
  std::uint64_t kprec = 1;
  estimate->add_option("--process", proc_path)->required();
  estimate->add_option("--x", x)->required();
  estimate->add_option("--k", kprec)->required();
  estimate->add_option("--seed", seed);
  estimate->add_option("--len", len, "orbit length (default h of the second-to-last stage + 1)");
  estimate->add_option("--stage", stage_opt, "draw the start point from S(C_stage)");

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  std::string witness_path;
  verify->add_option("--process", proc_path)->required();
  verify->add_option("--witness", witness_path, "witness JSON (object or array) to re-check");
  verify->add_option("--rate", rate_text, "also emit slow-rate certificates for this rate");
  verify->add_option("--seed", seed);

  // ryabko
  auto* ryabko = app.add_subcommand("ryabko", "sample the three-letter chain and estimate p_j");
  std::string p_text, est_text, overflow = "fail";
  ryabko->add_option("--p", p_text, "p_1,p_2,... as rationals")->required();
  ryabko->add_option("--seed", seed);
  ryabko->add_option("--len", len)->required();
  ryabko->add_option("--estimate", est_text, "j=..,k=..");
  ryabko->add_option("--overflow", overflow, "fail | repeat-last")
      ->check(CLI::IsMember({"fail", "repeat-last"}));

  // rate-curve
  auto* curve = app.add_subcommand("rate-curve", "deviation fractions of empirical frequencies");
  std::string lengths_text;
  std::uint64_t trials = 1000;
  unsigned jobs = 1;
  curve->add_option("--process", proc_path)->required();
  curve->add_option("--x", x)->required();
  curve->add_option("--k", kprec)->required();
  curve->add_option("--lengths", lengths_text)->required();
  curve->add_option("--trials", trials);
  curve->add_option("--seed", seed);
  curve->add_option("--stage", stage_opt);
  curve->add_option("--eps", eps_text, "width of the P(x) enclosure (default 2^-12)");
  curve->add_option("--jobs", jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*build) {
      LoadedProcess lp;
      if (*b_t2) {
        ProcessSpec spec;
        spec.kind = ProcessKind::theorem2;
        spec.stages = stages;
        if (k_text.empty() == rate_text.empty()) throw UsageError("give exactly one of --k, --rate");
        if (!k_text.empty()) {
          spec.k = parse_u64_list(k_text);
          if (spec.k.size() < stages + 1) {
            throw UsageError("--k needs k_0..k_" + std::to_string(stages));
          }
          spec.k.resize(stages + 1);
        } else {
          spec.rate = rate_text;
        }
        lp = build_from_spec(spec);
      } else {
        ProcessSpec spec;
        spec.kind = ProcessKind::adversary;
        spec.stages = stages;
        spec.estimators = read_json(est_path);
        if (!spec.estimators.is_array()) throw UsageError("estimator config must be a JSON array");
        spec.budgets = parse_budgets(budget_text);
        lp = build_from_spec(spec);
        print_verdicts(*lp.adversary);
      }
      write_output(out_path, process_document(lp).dump(2) + "\n");
      if (lp.adversary && lp.adversary->trace.aborted) {
        std::cerr << "budget abort: " << *lp.adversary->trace.aborted << "\n";
        return kBudget;
      }
      return kOk;
    }

    if (*sample) {
      const auto lp = load_process(proc_path);
      for (std::uint64_t t = 0; t < count; ++t) {
        std::cout << lp.process->sample_orbit(seed + t, len, stage_opt).bits << "\n";
      }
      return kOk;
    }

    if (*prob) {
      if (!binary(x)) throw UsageError("--x must be binary");
      const auto lp = load_process(proc_path);
      Enclosure e;
      if (stage_opt) {
        e = lp.process->enclosure_at(x, *stage_opt);
      } else if (!eps_text.empty()) {
        e = lp.process->block_prob_limit(x, parse_dyadic(eps_text));
      } else {
        e = lp.process->enclosure_at(x, lp.process->last_stage());
      }
      Json j = to_json(e);
      j["lo_decimal"] = e.lo.to_double();
      j["hi_decimal"] = e.hi.to_double();
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (*estimate) {
      if (!binary(x)) throw UsageError("--x must be binary");
      const auto lp = load_process(proc_path);
      const Process& p = *lp.process;
      if (p.kind() != ProcessKind::theorem2) throw UsageError("estimate needs a theorem2 process");
      if (len == 0) {
        const std::size_t s = p.last_stage() ? p.last_stage() - 1 : 0;
        if (p.height(s) > (1 << 24)) throw UsageError("give --len explicitly");
        len = p.height(s).get_ui() + 1;
      }
      const auto orbit = p.sample_orbit(seed, len, stage_opt);
      const auto trace = recover_k_trace(orbit.bits);
      Json j{{"x", x}, {"k", kprec}, {"seed", seed}, {"len", len}};
      j["recovered_k"] = trace.table.k;
      j["consistent"] = trace.table.consistent;
      const auto g = g_estimate(x, kprec, trace);
      if (g.value) {
        j["value"] = g.value->get_str();
        j["value_decimal"] = g.value->get_d();
        j["pairs_used"] = g.pairs_used;
        j["prefix_used"] = g.prefix_used;
      } else {
        j["value"] = nullptr;
        j["status"] = "not-yet";
      }
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (*verify) {
      const Json doc = read_json(proc_path);
      const auto lp = build_from_spec(spec_from_json(doc));
      VerifyOptions opt;
      opt.seed = seed;
      if (!rate_text.empty()) {
        opt.rate = rate_text;
      } else if (lp.spec.rate) {
        opt.rate = lp.spec.rate;
      }
      if (doc.contains("trace")) opt.recorded_trace = trace_from_json(doc.at("trace"));
      if (!witness_path.empty()) {
        const Json w = read_json(witness_path);
        if (w.is_array()) {
          for (const auto& item : w) opt.extra_witnesses.push_back(witness_from_json(item));
        } else if (w.contains("witnesses")) {
          for (const auto& item : w.at("witnesses")) {
            opt.extra_witnesses.push_back(witness_from_json(item));
          }
        } else {
          opt.extra_witnesses.push_back(witness_from_json(w));
        }
      }
      bool all = true;
      for (const auto& r : run_verification(lp, opt)) {
        std::cout << r.name << " " << (r.pass ? "PASS" : "FAIL");
        if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
        std::cout << "\n";
        all = all && r.pass;
      }
      return all ? kOk : kVerifyFailed;
    }

    if (*ryabko) {
      RyabkoSpec spec;
      for (const auto& item : split(p_text, ',')) spec.p.push_back(parse_rational(item));
      spec.overflow = overflow == "fail" ? RyabkoSpec::Overflow::fail
                                         : RyabkoSpec::Overflow::repeat_last;
      const std::string bits = sample_ryabko(spec, seed, len);
      if (est_text.empty()) {
        std::cout << bits << "\n";
        return kOk;
      }
      std::size_t j = 0;
      std::uint64_t k = 0;
      for (const auto& item : split(est_text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--estimate wants j=..,k=..");
        const auto v = parse_u64_list(item.substr(eq + 1)).at(0);
        if (item.substr(0, eq) == "j") {
          j = v;
        } else if (item.substr(0, eq) == "k") {
          k = v;
        } else {
          throw UsageError("--estimate wants j=..,k=..");
        }
      }
      const auto est = estimate_pj(bits, j, k);
      Json out{{"j", j},
               {"k", k},
               {"samples_needed", est.samples_needed},
               {"samples_seen", est.samples_seen}};
      if (est.value) {
        out["value"] = est.value->get_str();
        out["value_decimal"] = est.value->get_d();
        out["prefix_used"] = est.prefix_used;
      } else {
        out["value"] = nullptr;
        out["status"] = "not-yet";
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    }

    if (*curve) {
      if (!binary(x) || x.empty()) throw UsageError("--x must be a nonempty binary block");
      const auto lp = load_process(proc_path);
      const Process& p = *lp.process;
      if (p.kind() != ProcessKind::theorem2) {
        throw UsageError("rate-curve needs a theorem2 process (exact P(x) enclosure)");
      }
      const Dyadic eps = eps_text.empty() ? Dyadic::pow2_neg(12) : parse_dyadic(eps_text);
      Enclosure truth = x == "0" || x == "1" ? Enclosure{x, Dyadic::pow2_neg(1),
                                                         Dyadic::pow2_neg(1), 0}
                                             : p.block_prob_limit(x, eps);
      RateCurveConfig cfg;
      cfg.x = x;
      cfg.k = kprec;
      cfg.lengths = parse_u64_list(lengths_text);
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.sample_stage = stage_opt;
      cfg.jobs = jobs;
      write_curve_csv(std::cout, rate_curve(p, truth, cfg));
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetError& e) {
    std::cerr << "budget: " << e.what() << "\n";
    return kBudget;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InconsistentInput& e) {
    std::cerr << "inconsistent input: " << e.what() << "\n";
    return kVerifyFailed;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

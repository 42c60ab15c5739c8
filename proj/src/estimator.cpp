#include "cutstack/estimator.hpp"

#include <csignal>
#include <cstring>
#include <random>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "cutstack/error.hpp"
#include "cutstack/stats.hpp"

namespace cutstack {

const char* to_string(Evaluation::Status s) {
  switch (s) {
    case Evaluation::Status::defined:
      return "defined";
    case Evaluation::Status::not_yet:
      return "not-yet";
    case Evaluation::Status::budget_exhausted:
      return "budget-exhausted";
  }
  return "?";
}

namespace {

std::string zeros(std::size_t m) { return std::string(m, '0'); }

bool claims(const mpq_class& value, std::uint64_t k, const mpq_class& bound) {
  return value + mpq_class(1, k) < bound;
}

}  // namespace

std::optional<FHatHit> Estimator::first_claim(std::size_t m, std::string_view y,
                                              const mpq_class& bound, std::uint64_t k_lo,
                                              std::uint64_t k_hi,
                                              std::uint64_t step_budget) const {
  const std::string x = zeros(m);
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    const Evaluation ev = evaluate(x, k, y, step_budget);
    if (ev.defined() && claims(ev.value, k, bound)) return FHatHit{k, ev.value};
  }
  return std::nullopt;
}

ConstantEstimator::ConstantEstimator(mpq_class value) : value_(std::move(value)) {
  value_.canonicalize();
}

std::string ConstantEstimator::tag() const { return "constant(" + value_.get_str() + ")"; }

Evaluation ConstantEstimator::evaluate(std::string_view, std::uint64_t, std::string_view,
                                       std::uint64_t) const {
  return {Evaluation::Status::defined, value_, 1};
}

std::optional<std::uint64_t> GrowthRule::operator()(std::uint64_t k, std::size_t len) const {
  mpz_class g = scale;
  mpz_class t;
  mpz_ui_pow_ui(t.get_mpz_t(), k, k_pow);
  g *= t;
  mpz_ui_pow_ui(t.get_mpz_t(), len, len_pow);
  g *= t;
  g <<= exp2_len * len;
  if (!g.fits_ulong_p()) return std::nullopt;
  return g.get_ui();
}

std::string GrowthRule::describe() const {
  if (*this == quadratic_exponential()) return "k^2*2^|x|";
  if (*this == linear()) return "k*|x|";
  return std::to_string(scale) + "*k^" + std::to_string(k_pow) + "*|x|^" +
         std::to_string(len_pow) + "*2^(" + std::to_string(exp2_len) + "|x|)";
}

GrowthRule GrowthRule::parse(std::string_view name) {
  if (name == "k^2*2^|x|" || name == "default") return quadratic_exponential();
  if (name == "k*|x|" || name == "linear") return linear();
  throw PreconditionError("unknown growth rule '" + std::string(name) +
                          "' (expected k^2*2^|x| or k*|x|)");
}

EmpiricalEstimator::EmpiricalEstimator(GrowthRule rule) : rule_(rule) {}

std::string EmpiricalEstimator::tag() const { return "empirical(" + rule_.describe() + ")"; }

Evaluation EmpiricalEstimator::evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                                        std::uint64_t step_budget) const {
  if (x.empty()) return {Evaluation::Status::defined, mpq_class(1), 1};
  const auto g = rule_(k, x.size());
  if (!g) return {Evaluation::Status::budget_exhausted, 0, step_budget};
  const std::uint64_t need = std::max<std::uint64_t>(*g, x.size());
  if (need > step_budget) return {Evaluation::Status::budget_exhausted, 0, step_budget};
  if (y.size() < need) return {Evaluation::Status::not_yet, 0, 0};
  return {Evaluation::Status::defined, empirical_freq(y.substr(0, need), x), need};
}

std::optional<FHatHit> EmpiricalEstimator::first_claim(std::size_t m, std::string_view y,
                                                       const mpq_class& bound,
                                                       std::uint64_t k_lo, std::uint64_t k_hi,
                                                       std::uint64_t step_budget) const {
  // One pass over y: count[L] grows as the window prefix L grows with k.
  std::uint64_t scanned = 0;
  std::uint64_t run = 0;
  std::uint64_t count = 0;
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    const auto g = rule_(k, m);
    if (!g) return std::nullopt;
    const std::uint64_t need = std::max<std::uint64_t>(*g, m);
    if (need > step_budget || need > y.size()) return std::nullopt;
    for (; scanned < need; ++scanned) {
      run = y[scanned] == '0' ? run + 1 : 0;
      if (run >= m) ++count;
    }
    mpq_class v(static_cast<unsigned long>(count), static_cast<unsigned long>(need - m + 1));
    v.canonicalize();
    if (claims(v, k, bound)) return FHatHit{k, v};
  }
  return std::nullopt;
}

OracleEstimator::OracleEstimator(std::shared_ptr<const Process> p) : p_(std::move(p)) {
  if (!p_ || p_->kind() != ProcessKind::theorem2) {
    throw PreconditionError("oracle estimator needs a theorem2 process");
  }
}

std::string OracleEstimator::tag() const {
  std::string s = "oracle(k=";
  for (std::size_t i = 0; i < p_->k_sequence().size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p_->k(i));
  }
  return s + ")";
}

Evaluation OracleEstimator::evaluate(std::string_view x, std::uint64_t k, std::string_view,
                                     std::uint64_t) const {
  if (k < 1) throw PreconditionError("oracle estimator: k must be at least 1");
  // Width 1/(2k) rounded down to a power of two.
  std::uint64_t e = 1;
  while ((std::uint64_t{1} << (e - 1)) < k) ++e;
  try {
    Enclosure enc = p_->block_prob_limit(x, Dyadic::pow2_neg(e));
    return {Evaluation::Status::defined, (enc.lo + enc.hi).half().to_mpq(), 1};
  } catch (const BudgetError&) {
    return {Evaluation::Status::budget_exhausted, 0, 1};
  }
}

Evaluation parse_estimator_reply(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line == "NOTYET") return {Evaluation::Status::not_yet, 0, 1};
  if (line.rfind("VAL ", 0) == 0) {
    mpq_class q;
    const std::string body(line.substr(4));
    if (body.empty() || q.set_str(body, 10) != 0 || q.get_den() == 0) {
      throw PreconditionError("estimator reply: bad value '" + body + "'");
    }
    q.canonicalize();
    return {Evaluation::Status::defined, q, 1};
  }
  throw PreconditionError("estimator reply: expected VAL p/q or NOTYET, got '" +
                          std::string(line) + "'");
}

SubprocessEstimator::SubprocessEstimator(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
  if (argv_.empty()) throw PreconditionError("subprocess estimator: empty command");
}

SubprocessEstimator::~SubprocessEstimator() { stop(); }

std::string SubprocessEstimator::tag() const {
  std::string s = "subprocess(";
  for (std::size_t i = 0; i < argv_.size(); ++i) s += (i ? " " : "") + argv_[i];
  return s + ")";
}

void SubprocessEstimator::start() const {
  int in[2];
  int out[2];
  if (pipe(in) != 0 || pipe(out) != 0) throw std::runtime_error("pipe failed");
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    dup2(in[0], STDIN_FILENO);
    dup2(out[1], STDOUT_FILENO);
    close(in[0]);
    close(in[1]);
    close(out[0]);
    close(out[1]);
    std::vector<char*> args;
    for (const auto& a : argv_) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  pending_.clear();
}

void SubprocessEstimator::stop() const {
  if (pid_ < 0) return;
  close(to_child_);
  close(from_child_);
  int status = 0;
  waitpid(pid_, &status, 0);
  pid_ = -1;
}

Evaluation SubprocessEstimator::evaluate(std::string_view x, std::uint64_t k, std::string_view y,
                                         std::uint64_t) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (pid_ < 0) start();
  std::string req = "EST " + std::string(x) + " " + std::to_string(k) + " " + std::string(y) + "\n";
  // Writing to a dead child must not kill the caller.
  struct sigaction ignore {};
  struct sigaction old {};
  ignore.sa_handler = SIG_IGN;
  sigaction(SIGPIPE, &ignore, &old);
  std::size_t off = 0;
  while (off < req.size()) {
    const ssize_t w = write(to_child_, req.data() + off, req.size() - off);
    if (w <= 0) {
      sigaction(SIGPIPE, &old, nullptr);
      stop();
      throw std::runtime_error("subprocess estimator: write failed");
    }
    off += static_cast<std::size_t>(w);
  }
  sigaction(SIGPIPE, &old, nullptr);
  for (;;) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return parse_estimator_reply(line);
    }
    char buf[4096];
    const ssize_t r = read(from_child_, buf, sizeof buf);
    if (r <= 0) {
      stop();
      throw std::runtime_error("subprocess estimator: child closed its output");
    }
    pending_.append(buf, static_cast<std::size_t>(r));
  }
}

std::optional<FHatHit> fhat_search(const Estimator& f, const FHatQuery& q) {
  if (q.k_budget < 1 || q.m_budget < 1) throw PreconditionError("fhat: budgets must be >= 1");
  if (q.m < 1 || q.m > q.m_budget) return std::nullopt;
  if (q.n > 4096) return std::nullopt;
  const mpq_class bound(mpz_class(1), mpz_class(1) << (q.n + 2));
  std::uint64_t k_lo = 1;
  if (auto floor = f.value_floor()) {
    if (*floor >= bound) return std::nullopt;
    // f + 1/k < bound needs k > 1/(bound - floor).
    const mpq_class inv = 1 / (bound - *floor);
    mpz_class lo = inv.get_num() / inv.get_den() + 1;
    if (lo > q.k_budget) return std::nullopt;
    k_lo = lo.get_ui();
  }
  return f.first_claim(q.m, q.y, bound, k_lo, q.k_budget, q.step_budget);
}

bool fhat_member(const Estimator& f, const FHatQuery& q) { return fhat_search(f, q).has_value(); }

std::size_t prefix_stability_violations(
    const Estimator& f, const std::vector<std::pair<std::string, std::uint64_t>>& queries,
    std::string_view y, std::size_t extensions, std::size_t max_extra, std::uint64_t seed,
    std::uint64_t step_budget) {
  std::mt19937_64 rng(seed);
  std::size_t bad = 0;
  for (const auto& [x, k] : queries) {
    const Evaluation base = f.evaluate(x, k, y, step_budget);
    if (!base.defined()) continue;
    for (std::size_t t = 0; t < extensions; ++t) {
      std::string z(y);
      const std::size_t extra = max_extra ? rng() % (max_extra + 1) : 0;
      for (std::size_t i = 0; i < extra; ++i) z.push_back(static_cast<char>('0' + (rng() & 1)));
      const Evaluation ev = f.evaluate(x, k, z, step_budget);
      if (!ev.defined() || ev.value != base.value) ++bad;
    }
  }
  return bad;
}

}  // namespace cutstack

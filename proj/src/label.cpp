#include "cutstack/label.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "cutstack/error.hpp"

namespace cutstack {

namespace {

std::atomic<std::uint64_t> next_label_id{1};

// Nodes at most this long cache their expansion for fast extraction.
constexpr std::uint64_t kSmallNode = 4096;

// Per-(node, pattern) summary: occurrence count plus the first and last
// min(length, |pattern|-1) symbols.
struct Fringe {
  mpz_class count;
  mpz_class length;
  std::string head;
  std::string tail;
};

Fringe empty_fringe() { return Fringe{0, 0, {}, {}}; }

Fringe combine(const Fringe& a, const Fringe& b, std::string_view p) {
  const std::size_t keep = p.size() - 1;
  Fringe r;
  r.length = a.length + b.length;
  r.count = a.count + b.count;
  if (keep > 0) {
    const std::string seam = a.tail + b.head;
    const std::size_t split = a.tail.size();
    // Occurrences that start inside a's tail and end inside b's head.
    for (std::size_t j = 0; j < split && j + p.size() <= seam.size(); ++j) {
      if (j + p.size() > split && seam.compare(j, p.size(), p) == 0) ++r.count;
    }
    r.head = a.length >= keep ? a.head : (a.head + b.head).substr(0, keep);
    if (b.length >= keep) {
      r.tail = b.tail;
    } else {
      std::string t = a.tail + b.tail;
      r.tail = t.size() > keep ? t.substr(t.size() - keep) : t;
    }
  }
  return r;
}

}  // namespace

struct LabelString::Node {
  enum class Kind { leaf, power, concat };

  Kind kind = Kind::leaf;
  char symbol = '0';
  std::vector<LabelString> parts;  // power: parts[0] is the base
  mpz_class times;
  mpz_class length;
  std::uint64_t id = next_label_id++;

  mutable std::mutex memo_mutex;
  mutable std::unordered_map<std::string, Fringe> memo;
  mutable std::once_flag small_once;
  mutable std::optional<std::string> small;

  const Fringe& fringe(std::string_view p) const;
  const std::string* small_expansion() const;
  void emit(mpz_class offset, std::size_t& remaining, std::string& out) const;
  void emit_raw(mpz_class offset, std::size_t& remaining, std::string& out) const;
};

const Fringe& LabelString::Node::fringe(std::string_view p) const {
  {
    std::lock_guard lock(memo_mutex);
    auto it = memo.find(std::string(p));
    if (it != memo.end()) return it->second;
  }
  Fringe f;
  switch (kind) {
    case Kind::leaf:
      f.length = 1;
      f.count = (p.size() == 1 && p[0] == symbol) ? 1 : 0;
      if (p.size() > 1) f.head = f.tail = std::string(1, symbol);
      break;
    case Kind::concat:
      f = empty_fringe();
      for (const auto& part : parts) f = combine(f, part.node_->fringe(p), p);
      break;
    case Kind::power: {
      // Binary exponentiation over the fringe monoid.
      f = empty_fringe();
      Fringe base = parts[0].node_->fringe(p);
      const std::size_t bits = mpz_sizeinbase(times.get_mpz_t(), 2);
      for (std::size_t b = 0; b < bits; ++b) {
        if (mpz_tstbit(times.get_mpz_t(), b)) f = combine(f, base, p);
        if (b + 1 < bits) base = combine(base, base, p);
      }
      break;
    }
  }
  std::lock_guard lock(memo_mutex);
  return memo.try_emplace(std::string(p), std::move(f)).first->second;
}

const std::string* LabelString::Node::small_expansion() const {
  if (length > kSmallNode) return nullptr;
  std::call_once(small_once, [this] {
    std::string s;
    std::size_t n = length.get_ui();
    s.reserve(n);
    emit_raw(0, n, s);
    small = std::move(s);
  });
  return &*small;
}

void LabelString::Node::emit(mpz_class offset, std::size_t& remaining,
                             std::string& out) const {
  if (remaining == 0) return;
  if (kind != Kind::leaf) {
    if (const std::string* s = small_expansion()) {
      const std::size_t off = offset.get_ui();
      const std::size_t n = std::min(remaining, s->size() - off);
      out.append(*s, off, n);
      remaining -= n;
      return;
    }
  }
  emit_raw(std::move(offset), remaining, out);
}

void LabelString::Node::emit_raw(mpz_class offset, std::size_t& remaining,
                                 std::string& out) const {
  switch (kind) {
    case Kind::leaf:
      out.push_back(symbol);
      --remaining;
      return;
    case Kind::concat:
      for (const auto& part : parts) {
        if (remaining == 0) return;
        const mpz_class& len = part.node_->length;
        if (offset >= len) {
          offset -= len;
          continue;
        }
        part.node_->emit(offset, remaining, out);
        offset = 0;
      }
      return;
    case Kind::power: {
      const Node& base = *parts[0].node_;
      mpz_class copy = offset / base.length;
      mpz_class within = offset % base.length;
      if (base.kind == Kind::leaf) {
        mpz_class avail = times - copy;
        std::size_t n = avail < remaining ? avail.get_ui() : remaining;
        out.append(n, base.symbol);
        remaining -= n;
        return;
      }
      for (; copy < times && remaining > 0; ++copy) {
        base.emit(within, remaining, out);
        within = 0;
      }
      return;
    }
  }
}

LabelString LabelString::leaf(char symbol) {
  if (symbol != '0' && symbol != '1') {
    throw PreconditionError(std::string("label leaf must be '0' or '1', got '") +
                            symbol + "'");
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::leaf;
  n->symbol = symbol;
  n->length = 1;
  return LabelString(std::move(n));
}

LabelString LabelString::power(LabelString base, mpz_class times) {
  if (times < 1) throw PreconditionError("label power needs times >= 1");
  if (times == 1) return base;
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::power;
  n->length = base.length() * times;
  n->times = std::move(times);
  n->parts.push_back(std::move(base));
  return LabelString(std::move(n));
}

LabelString LabelString::concat(std::vector<LabelString> parts) {
  if (parts.empty()) throw PreconditionError("label concat needs at least one part");
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::concat;
  n->length = 0;
  for (const auto& p : parts) n->length += p.length();
  n->parts = std::move(parts);
  return LabelString(std::move(n));
}

LabelString LabelString::literal(std::string_view s) {
  std::vector<LabelString> parts;
  parts.reserve(s.size());
  for (char c : s) parts.push_back(leaf(c));
  return concat(std::move(parts));
}

const mpz_class& LabelString::length() const { return node_->length; }

std::uint64_t LabelString::node_id() const { return node_->id; }

mpz_class LabelString::count_occurrences(std::string_view pattern,
                                         std::size_t pattern_cap) const {
  if (pattern.empty()) throw PreconditionError("count_occurrences: empty pattern");
  if (pattern.size() > pattern_cap) {
    throw PreconditionError("count_occurrences: pattern length " +
                            std::to_string(pattern.size()) + " exceeds cap " +
                            std::to_string(pattern_cap));
  }
  if (length() < pattern.size()) return 0;
  return node_->fringe(pattern).count;
}

std::string LabelString::extract(const mpz_class& start, std::size_t len) const {
  if (start < 1 || start + len - 1 > length()) {
    throw PreconditionError("extract: range [" + start.get_str() + ", +" +
                            std::to_string(len) + ") outside label of length " +
                            length().get_str());
  }
  std::string out;
  out.reserve(len);
  std::size_t remaining = len;
  node_->emit(start - 1, remaining, out);
  return out;
}

std::string LabelString::materialize(std::uint64_t limit) const {
  if (length() > limit) {
    throw BudgetError("materialize: label length " + length().get_str() +
                      " exceeds limit " + std::to_string(limit));
  }
  return extract(1, length().get_ui());
}

}  // namespace cutstack

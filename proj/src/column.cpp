#include "cutstack/column.hpp"

#include <algorithm>
#include <atomic>

#include "cutstack/error.hpp"

namespace cutstack {

namespace {

std::atomic<std::uint64_t> next_column_id{1};

const Dyadic kHalf = Dyadic::pow2_neg(1);

std::vector<DyadicInterval> merge_supports(std::vector<DyadicInterval> ivs) {
  std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) {
    return a.lower() < b.lower();
  });
  std::vector<DyadicInterval> out;
  for (auto& iv : ivs) {
    if (!out.empty()) {
      if (iv.lower() < out.back().upper()) {
        throw PreconditionError("stack: overlapping supports at " + iv.to_string());
      }
      if (iv.lower() == out.back().upper()) {
        out.back() = DyadicInterval(out.back().lower(), iv.upper());
        continue;
      }
    }
    out.push_back(std::move(iv));
  }
  return out;
}

}  // namespace

std::optional<char> symbol_class(const DyadicInterval& iv) {
  if (Dyadic(0) <= iv.lower() && iv.upper() <= kHalf) return '0';
  if (kHalf <= iv.lower() && iv.upper() <= Dyadic(1)) return '1';
  return std::nullopt;
}

mpz_class bit_reverse(const mpz_class& j, std::uint64_t n) {
  mpz_class r = 0;
  for (mp_bitcnt_t b = mpz_scan1(j.get_mpz_t(), 0); b != ~mp_bitcnt_t{0} && b < n;
       b = mpz_scan1(j.get_mpz_t(), b + 1)) {
    mpz_setbit(r.get_mpz_t(), n - 1 - b);
  }
  return r;
}

struct Column::Node {
  Kind kind = Kind::base;
  std::optional<DyadicInterval> slab;
  std::vector<Column> parts;  // doubled: parts[0] is the child
  std::uint64_t times = 0;

  Dyadic width;
  mpz_class height;
  Dyadic support_measure;
  std::vector<DyadicInterval> support;
  std::optional<LabelString> label;
  std::uint64_t id = next_column_id++;
};

Column Column::base(DyadicInterval slab) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::base;
  n->width = slab.width();
  n->height = 1;
  n->support_measure = n->width;
  n->support = {slab};
  if (auto sym = symbol_class(slab)) n->label = LabelString::leaf(*sym);
  n->slab = std::move(slab);
  return Column(std::move(n));
}

Column Column::doubled(Column c, std::uint64_t times) {
  if (times == 0) return c;
  auto n = std::make_shared<Node>();
  n->kind = Kind::doubled;
  n->times = times;
  n->width = c.width().scaled(-static_cast<std::int64_t>(times));
  mpz_class factor;
  mpz_ui_pow_ui(factor.get_mpz_t(), 2, times);
  n->height = c.height() * factor;
  n->support_measure = c.support_measure();
  n->support = c.support();
  if (c.compatible()) n->label = LabelString::power(c.label(), factor);
  n->parts.push_back(std::move(c));
  return Column(std::move(n));
}

Column Column::stack(std::vector<Column> parts) {
  if (parts.empty()) throw PreconditionError("stack: no columns");
  if (parts.size() == 1) return parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::stacked;
  n->width = parts.front().width();
  n->height = 0;
  n->support_measure = Dyadic(0);
  std::vector<DyadicInterval> all;
  bool compatible = true;
  for (const auto& p : parts) {
    if (p.width() != n->width) {
      throw PreconditionError("stack: width mismatch " + p.width().to_string() +
                              " vs " + n->width.to_string());
    }
    n->height += p.height();
    n->support_measure += p.support_measure();
    all.insert(all.end(), p.support().begin(), p.support().end());
    compatible = compatible && p.compatible();
  }
  n->support = merge_supports(std::move(all));
  if (compatible) {
    std::vector<LabelString> labels;
    labels.reserve(parts.size());
    for (const auto& p : parts) labels.push_back(p.label());
    n->label = LabelString::concat(std::move(labels));
  }
  n->parts = std::move(parts);
  return Column(std::move(n));
}

Column Column::stack(Column a, Column b) {
  return stack(std::vector<Column>{std::move(a), std::move(b)});
}

Column::Kind Column::kind() const { return node_->kind; }
const Dyadic& Column::width() const { return node_->width; }
const mpz_class& Column::height() const { return node_->height; }
const Dyadic& Column::support_measure() const { return node_->support_measure; }
const std::vector<DyadicInterval>& Column::support() const { return node_->support; }
bool Column::compatible() const { return node_->label.has_value(); }
std::uint64_t Column::id() const { return node_->id; }

const LabelString& Column::label() const {
  if (!node_->label) {
    throw PreconditionError("label: column is not compatible with (X^0, X^1)");
  }
  return *node_->label;
}

const DyadicInterval& Column::slab() const {
  if (kind() != Kind::base) throw PreconditionError("slab: not a base column");
  return *node_->slab;
}

const Column& Column::child() const {
  if (kind() != Kind::doubled) throw PreconditionError("child: not a doubled column");
  return node_->parts.front();
}

std::uint64_t Column::times() const {
  if (kind() != Kind::doubled) throw PreconditionError("times: not a doubled column");
  return node_->times;
}

const std::vector<Column>& Column::parts() const {
  if (kind() != Kind::stacked) throw PreconditionError("parts: not a stacked column");
  return node_->parts;
}

bool Column::support_contains(const Dyadic& p) const {
  const auto& s = node_->support;
  auto it = std::upper_bound(s.begin(), s.end(), p, [](const Dyadic& v, const auto& iv) {
    return v < iv.lower();
  });
  return it != s.begin() && std::prev(it)->contains(p);
}

std::optional<Location> Column::locate(const Dyadic& p) const {
  if (!support_contains(p)) return std::nullopt;
  switch (kind()) {
    case Kind::base:
      return Location{1, *node_->slab};
    case Kind::doubled: {
      const Column& c = child();
      auto loc = c.locate(p);
      if (!loc) return std::nullopt;
      const auto n = static_cast<std::int64_t>(times());
      // Piece q of the located level; the copy holding it is bitrev(q).
      mpz_class q = floor_div(p - loc->interval.lower(), c.width().scaled(-n));
      mpz_class copy = bit_reverse(q, times());
      return Location{copy * c.height() + loc->level, loc->interval.piece(times(), q)};
    }
    case Kind::stacked: {
      mpz_class offset = 0;
      for (const auto& part : parts()) {
        if (part.support_contains(p)) {
          auto loc = part.locate(p);
          if (!loc) return std::nullopt;
          loc->level += offset;
          return loc;
        }
        offset += part.height();
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

DyadicInterval Column::level_interval(const mpz_class& level) const {
  if (level < 1 || level > height()) {
    throw PreconditionError("level " + level.get_str() + " outside column of height " +
                            height().get_str());
  }
  switch (kind()) {
    case Kind::base:
      return *node_->slab;
    case Kind::doubled: {
      const Column& c = child();
      mpz_class copy = (level - 1) / c.height();
      mpz_class inner = (level - 1) % c.height() + 1;
      return c.level_interval(inner).piece(times(), bit_reverse(copy, times()));
    }
    case Kind::stacked: {
      mpz_class l = level;
      for (const auto& part : parts()) {
        if (l <= part.height()) return part.level_interval(l);
        l -= part.height();
      }
      break;
    }
  }
  throw PreconditionError("level_interval: unreachable level");
}

std::vector<DyadicInterval> Column::materialize(std::uint64_t limit) const {
  if (height() > limit) {
    throw BudgetError("materialize: column height " + height().get_str() +
                      " exceeds limit " + std::to_string(limit));
  }
  std::vector<DyadicInterval> out;
  out.reserve(height().get_ui());
  switch (kind()) {
    case Kind::base:
      out.push_back(*node_->slab);
      break;
    case Kind::doubled: {
      const auto inner = child().materialize(limit);
      const std::uint64_t copies = std::uint64_t{1} << times();
      for (std::uint64_t j = 0; j < copies; ++j) {
        mpz_class q = bit_reverse(mpz_class(static_cast<unsigned long>(j)), times());
        for (const auto& iv : inner) out.push_back(iv.piece(times(), q));
      }
      break;
    }
    case Kind::stacked:
      for (const auto& part : parts()) {
        auto levels = part.materialize(limit);
        out.insert(out.end(), levels.begin(), levels.end());
      }
      break;
  }
  return out;
}

}  // namespace cutstack

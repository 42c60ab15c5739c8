#include "cutstack/dyadic.hpp"

#include <cmath>
#include <sstream>

#include "cutstack/error.hpp"

namespace cutstack {

namespace {

mpz_class shl(const mpz_class& v, std::uint64_t bits) {
  mpz_class r;
  mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), bits);
  return r;
}

}  // namespace

Dyadic::Dyadic(mpz_class mantissa, std::uint64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent) {
  canonicalize();
}

Dyadic Dyadic::pow2_neg(std::uint64_t k) { return Dyadic(mpz_class(1), k); }

Dyadic Dyadic::pow2(std::uint64_t k) { return Dyadic(shl(mpz_class(1), k), 0); }

void Dyadic::canonicalize() {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  if (exponent_ == 0) return;
  std::uint64_t tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
  std::uint64_t drop = tz < exponent_ ? tz : exponent_;
  if (drop > 0) {
    mpz_fdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), drop);
    exponent_ -= drop;
  }
}

Dyadic Dyadic::operator-() const {
  Dyadic r = *this;
  r.mantissa_ = -r.mantissa_;
  return r;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
  if (exponent_ >= o.exponent_) {
    mantissa_ += shl(o.mantissa_, exponent_ - o.exponent_);
  } else {
    mantissa_ = shl(mantissa_, o.exponent_ - exponent_) + o.mantissa_;
    exponent_ = o.exponent_;
  }
  canonicalize();
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += -o; }

Dyadic& Dyadic::operator*=(const Dyadic& o) {
  mantissa_ *= o.mantissa_;
  exponent_ += o.exponent_;
  canonicalize();
  return *this;
}

Dyadic Dyadic::scaled(std::int64_t shift) const {
  if (shift >= 0) {
    auto s = static_cast<std::uint64_t>(shift);
    if (exponent_ >= s) return Dyadic(mantissa_, exponent_ - s);
    return Dyadic(shl(mantissa_, s - exponent_), 0);
  }
  return Dyadic(mantissa_, exponent_ + static_cast<std::uint64_t>(-shift));
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  int c;
  if (a.exponent_ == b.exponent_) {
    c = cmp(a.mantissa_, b.mantissa_);
  } else if (a.exponent_ > b.exponent_) {
    c = cmp(a.mantissa_, shl(b.mantissa_, a.exponent_ - b.exponent_));
  } else {
    c = cmp(shl(a.mantissa_, b.exponent_ - a.exponent_), b.mantissa_);
  }
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

mpq_class Dyadic::to_mpq() const {
  mpq_class q(mantissa_, shl(mpz_class(1), exponent_));
  q.canonicalize();
  return q;
}

double Dyadic::to_double() const {
  long exp = 0;
  double m = mpz_get_d_2exp(&exp, mantissa_.get_mpz_t());
  return std::ldexp(m, static_cast<int>(exp - static_cast<long>(exponent_)));
}

mpz_class Dyadic::floor() const {
  mpz_class r;
  mpz_fdiv_q_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), exponent_);
  return r;
}

std::string Dyadic::to_string() const {
  std::ostringstream os;
  os << mantissa_.get_str();
  if (exponent_ != 0) os << "/2^" << exponent_;
  return os.str();
}

mpz_class floor_div(const Dyadic& a, const Dyadic& b) {
  if (b.sign() <= 0) throw PreconditionError("floor_div: divisor must be positive");
  // a/b = (ma * 2^eb) / (mb * 2^ea)
  mpz_class num = a.mantissa();
  mpz_class den = b.mantissa();
  if (b.exponent() >= a.exponent()) {
    num = shl(num, b.exponent() - a.exponent());
  } else {
    den = shl(den, a.exponent() - b.exponent());
  }
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return q;
}

Dyadic operator*(const Dyadic& a, const mpz_class& n) { return a * Dyadic(n); }

DyadicInterval::DyadicInterval(Dyadic lower, Dyadic upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (!(lower_ < upper_)) {
    throw PreconditionError("interval requires lower < upper, got [" +
                            lower_.to_string() + ", " + upper_.to_string() + ")");
  }
}

DyadicInterval DyadicInterval::piece(std::uint64_t n, const mpz_class& q) const {
  Dyadic w = width().scaled(-static_cast<std::int64_t>(n));
  Dyadic lo = lower_ + w * q;
  return DyadicInterval(lo, lo + w);
}

std::string DyadicInterval::to_string() const {
  return "[" + lower_.to_string() + ", " + upper_.to_string() + ")";
}

std::pair<DyadicInterval, DyadicInterval> interval_split(const DyadicInterval& iv) {
  Dyadic mid = iv.lower() + iv.width().half();
  return {DyadicInterval(iv.lower(), mid), DyadicInterval(mid, iv.upper())};
}

Dyadic translate(const Dyadic& point, const DyadicInterval& from,
                 const DyadicInterval& to) {
  if (from.width() != to.width()) {
    throw PreconditionError("translate: width mismatch " + from.to_string() +
                            " vs " + to.to_string());
  }
  if (!from.contains(point)) {
    throw PreconditionError("translate: point " + point.to_string() +
                            " outside " + from.to_string());
  }
  return to.lower() + (point - from.lower());
}

}  // namespace cutstack

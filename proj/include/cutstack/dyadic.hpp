#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>

#include <gmpxx.h>

namespace cutstack {

// Exact number mantissa * 2^(-exponent), kept in canonical form
// (exponent == 0 or mantissa odd), so equality is structural.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long value) : mantissa_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Dyadic(mpz_class mantissa, std::uint64_t exponent = 0);

  // 2^(-k).
  static Dyadic pow2_neg(std::uint64_t k);
  // 2^k for k >= 0.
  static Dyadic pow2(std::uint64_t k);

  const mpz_class& mantissa() const { return mantissa_; }
  std::uint64_t exponent() const { return exponent_; }

  int sign() const { return sgn(mantissa_); }
  bool is_zero() const { return mantissa_ == 0; }

  Dyadic operator-() const;
  Dyadic& operator+=(const Dyadic& o);
  Dyadic& operator-=(const Dyadic& o);
  Dyadic& operator*=(const Dyadic& o);

  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
  friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

  // Multiplies by 2^shift (shift may be negative).
  Dyadic scaled(std::int64_t shift) const;
  Dyadic half() const { return scaled(-1); }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  mpq_class to_mpq() const;
  double to_double() const;
  mpz_class floor() const;

  // "m/2^e", or just "m" when e == 0.
  std::string to_string() const;

 private:
  void canonicalize();

  mpz_class mantissa_{0};
  std::uint64_t exponent_ = 0;
};

// floor(a / b) for b > 0.
mpz_class floor_div(const Dyadic& a, const Dyadic& b);

Dyadic operator*(const Dyadic& a, const mpz_class& n);

// Half-open [lower, upper) with lower < upper.
class DyadicInterval {
 public:
  DyadicInterval(Dyadic lower, Dyadic upper);

  const Dyadic& lower() const { return lower_; }
  const Dyadic& upper() const { return upper_; }
  Dyadic width() const { return upper_ - lower_; }

  bool contains(const Dyadic& p) const { return lower_ <= p && p < upper_; }
  bool contains(const DyadicInterval& o) const {
    return lower_ <= o.lower_ && o.upper_ <= upper_;
  }
  bool disjoint(const DyadicInterval& o) const {
    return upper_ <= o.lower_ || o.upper_ <= lower_;
  }

  // The piece of index q when cut into 2^n equal pieces, left to right.
  DyadicInterval piece(std::uint64_t n, const mpz_class& q) const;

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

  std::string to_string() const;

 private:
  Dyadic lower_;
  Dyadic upper_;
};

std::pair<DyadicInterval, DyadicInterval> interval_split(const DyadicInterval& iv);

// to.lower + (point - from.lower); widths must match and point must lie in from.
Dyadic translate(const Dyadic& point, const DyadicInterval& from,
                 const DyadicInterval& to);

}  // namespace cutstack

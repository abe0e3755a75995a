#pragma once

#include <compare>
#include <concepts>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace qcons {

using Integer = mpz_class;

/// Exact fraction, always in lowest terms with a positive denominator.
class Rational {
 public:
  Rational() = default;
  template <std::signed_integral T>
  Rational(T v) : v_(static_cast<long>(v)) {}
  template <std::unsigned_integral T>
  Rational(T v) : v_(static_cast<unsigned long>(v)) {}
  Rational(const Integer& v) : v_(v) {}
  Rational(const Integer& num, const Integer& den);
  explicit Rational(const mpq_class& q) : v_(q) {}

  /// Accepts "p/q", an integer, or a finite decimal such as "-12.375".
  /// Anything else (exponents, inf, nan, empty) is a ParseError.
  static Rational parse(std::string_view text);

  const mpq_class& raw() const noexcept { return v_; }
  const Integer& num() const noexcept { return v_.get_num(); }
  const Integer& den() const noexcept { return v_.get_den(); }

  Integer floor() const;
  Integer ceil() const;
  /// x - floor(x), in [0, 1).
  Rational frac() const;
  Rational abs() const { return Rational(::abs(v_)); }
  int sign() const noexcept { return sgn(v_); }
  bool is_integer() const noexcept { return v_.get_den() == 1; }

  double to_double() const { return v_.get_d(); }
  /// "p/q", or just "p" when the value is an integer.
  std::string str() const;
  std::size_t hash() const noexcept;

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    const int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

Integer lcm(const Integer& a, const Integer& b);

/// Least common multiple of the denominators of a row of positive weights.
/// Throws EmptyNeighborhood for an empty row.
Integer lcm_denominators(std::span<const Rational> weights_row);

/// Exact square root when both numerator and denominator are perfect squares.
bool exact_sqrt(const Rational& x, Rational& root);

/// Decimal rendering of sqrt(x) to the requested number of significant digits.
std::string sqrt_decimal(const Rational& x, int digits = 12);

std::size_t hash_integer(const Integer& z) noexcept;

}  // namespace qcons

template <>
struct std::hash<qcons::Rational> {
  std::size_t operator()(const qcons::Rational& r) const noexcept { return r.hash(); }
};

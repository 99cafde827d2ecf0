#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace sandpile {

// Exact rational number with 64-bit numerator/denominator. All arithmetic
// goes through 128-bit intermediates and throws OverflowError if the reduced
// result does not fit. The denominator is always positive and the fraction is
// kept in lowest terms, so == is structural.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  // Accepts "p/q", "p" and finite decimals such as "0.075" or "-1.25".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  std::int64_t floor() const;
  std::int64_t ceil() const;
  // Nearest integer, halves rounded up (toward +infinity).
  std::int64_t round() const;
  Rational frac() const { return *this - Rational(floor()); }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// floor(t * x), ceil(t * x) and round(t * x) for integer x without building
// the intermediate Rational (so large x do not need a reducible product).
std::int64_t floor_mul(const Rational& t, std::int64_t x);
std::int64_t ceil_mul(const Rational& t, std::int64_t x);
std::int64_t round_mul(const Rational& t, std::int64_t x);

}  // namespace sandpile

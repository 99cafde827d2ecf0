#include "sandpile/rational.hpp"

#include <cctype>
#include <limits>
#include <ostream>

#include "sandpile/error.hpp"

namespace sandpile {
namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(i128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

// floor(a / b) for b > 0
i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

std::int64_t checked64(i128 v, const char* what) {
  if (!fits64(v)) throw OverflowError(std::string("rational overflow in ") + what);
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error("rational with zero denominator");
  *this = from_wide(num, den);
}

Rational Rational::from_wide(i128 num, i128 den) {
  if (den == 0) throw Error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  Rational r;
  r.num_ = checked64(num, "numerator");
  r.den_ = checked64(den, "denominator");
  return r;
}

Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw ParseError("empty rational");

  auto parse_int = [&](std::string_view s) -> i128 {
    s = trim(s);
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      neg = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) throw ParseError("malformed rational '" + std::string(text) + "'");
    i128 v = 0;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw ParseError("malformed rational '" + std::string(text) + "'");
      v = v * 10 + (c - '0');
      if (v > std::numeric_limits<std::int64_t>::max())
        throw OverflowError("rational literal too large '" + std::string(text) + "'");
    }
    return neg ? -v : v;
  };

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    i128 n = parse_int(text.substr(0, slash));
    i128 d = parse_int(text.substr(slash + 1));
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    return from_wide(n, d);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view fracs = text.substr(dot + 1);
    bool neg = !whole.empty() && whole.front() == '-';
    if (fracs.size() > 17) throw ParseError("too many decimals in '" + std::string(text) + "'");
    i128 scale = 1;
    for (std::size_t k = 0; k < fracs.size(); ++k) scale *= 10;
    i128 w = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    i128 f = fracs.empty() ? 0 : parse_int(fracs);
    if (f < 0) throw ParseError("malformed rational '" + std::string(text) + "'");
    i128 mag = (w < 0 ? -w : w) * scale + f;
    return from_wide(neg ? -mag : mag, scale);
  }
  return from_wide(parse_int(text), 1);
}

std::int64_t Rational::floor() const { return static_cast<std::int64_t>(floor_div(num_, den_)); }

std::int64_t Rational::ceil() const { return static_cast<std::int64_t>(-floor_div(-static_cast<i128>(num_), den_)); }

std::int64_t Rational::round() const {
  // floor(num/den + 1/2) = floor((2 num + den) / (2 den))
  return static_cast<std::int64_t>(floor_div(2 * static_cast<i128>(num_) + den_, 2 * static_cast<i128>(den_)));
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return from_wide(-static_cast<i128>(num_), den_); }

Rational& Rational::operator+=(const Rational& o) {
  *this = from_wide(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_,
                    static_cast<i128>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& o) {
  *this = from_wide(static_cast<i128>(num_) * o.den_ - static_cast<i128>(o.num_) * den_,
                    static_cast<i128>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  // cross-reduce first so products of already-reduced fractions stay small
  i128 g1 = gcd128(num_, o.den_);
  i128 g2 = gcd128(o.num_, den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  *this = from_wide((num_ / g1) * (o.num_ / g2), (den_ / g2) * (o.den_ / g1));
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw Error("rational division by zero");
  *this *= from_wide(o.den_, o.num_);
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  i128 lhs = static_cast<i128>(a.num_) * b.den_;
  i128 rhs = static_cast<i128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

std::int64_t floor_mul(const Rational& t, std::int64_t x) {
  return checked64(floor_div(static_cast<i128>(t.num()) * x, t.den()), "floor_mul");
}

std::int64_t ceil_mul(const Rational& t, std::int64_t x) {
  return checked64(-floor_div(-static_cast<i128>(t.num()) * x, t.den()), "ceil_mul");
}

std::int64_t round_mul(const Rational& t, std::int64_t x) {
  i128 n = static_cast<i128>(t.num()) * x;
  return checked64(floor_div(2 * n + t.den(), 2 * static_cast<i128>(t.den())), "round_mul");
}

}  // namespace sandpile

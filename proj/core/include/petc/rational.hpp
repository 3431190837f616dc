#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace petc {

// exact positive rational for checking periods and tick arithmetic.
// kept deliberately tiny: the only operations the pipeline needs are
// gcd (for the base tick), exact division to integers, and printing.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool positive() const { return num > 0; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
};

// gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d)
inline Rational rational_gcd(const Rational& a, const Rational& b) {
  if (a.num == 0) return b;
  if (b.num == 0) return a;
  const std::int64_t n = std::gcd(a.num * b.den, b.num * a.den);
  return Rational(n, a.den * b.den);
}

// exact quotient a / b, which must be a positive integer (used for tick scales)
inline std::int64_t rational_ratio(const Rational& a, const Rational& b) {
  const std::int64_t lhs = a.num * b.den;
  const std::int64_t rhs = b.num * a.den;
  if (rhs == 0 || lhs % rhs != 0)
    throw std::invalid_argument("rational: periods are not commensurate with the base tick");
  const std::int64_t q = lhs / rhs;
  if (q <= 0) throw std::invalid_argument("rational: non-positive tick ratio");
  return q;
}

// parse "3", "1/100", or a plain decimal like "0.01" exactly
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& r);

}  // namespace petc

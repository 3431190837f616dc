#include "petc/rational.hpp"

#include <cctype>
#include <charconv>

namespace petc {

namespace {

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument("rational: bad integer '" + std::string(s) + "'");
  return v;
}

std::int64_t pow10_checked(std::size_t digits) {
  std::int64_t p = 1;
  for (std::size_t i = 0; i < digits; ++i) {
    if (p > INT64_MAX / 10)
      throw std::invalid_argument("rational: too many decimal digits");
    p *= 10;
  }
  return p;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::invalid_argument("rational: empty string");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    if (s.find('/', slash + 1) != std::string::npos ||
        s.find('.') != std::string::npos)
      throw std::invalid_argument("rational: malformed '" + text + "'");
    return Rational(parse_int(std::string_view(s).substr(0, slash)),
                    parse_int(std::string_view(s).substr(slash + 1)));
  }

  if (auto dot = s.find('.'); dot != std::string::npos) {
    if (s.find('.', dot + 1) != std::string::npos)
      throw std::invalid_argument("rational: malformed '" + text + "'");
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac = s.size() - dot - 1;
    if (frac == 0 || dot == 0 || (dot == 1 && (s[0] == '+' || s[0] == '-')))
      throw std::invalid_argument("rational: malformed '" + text + "'");
    return Rational(parse_int(digits), pow10_checked(frac));
  }

  return Rational(parse_int(s), 1);
}

std::string format_rational(const Rational& r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace petc

#include "bitml/core.hpp"

#include <cctype>
#include <cstdio>

namespace bitml {

std::string to_string(const Integer& value) { return value.str(); }

std::string to_string(const Rational& value) {
  const Integer num = boost::multiprecision::numerator(value);
  const Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

bool parse_integer(std::string_view text, Integer& out) {
  if (text.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (text[0] == '-') {
    neg = true;
    i = 1;
  }
  if (i == text.size()) return false;
  Integer acc = 0;
  for (; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    acc = acc * 10 + (text[i] - '0');
  }
  out = neg ? Integer(-acc) : acc;
  return true;
}

bool parse_rational(std::string_view text, Rational& out) {
  const auto slash = text.find('/');
  Integer num, den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_integer(text, num)) return false;
  } else {
    if (!parse_integer(text.substr(0, slash), num)) return false;
    const auto rest = text.substr(slash + 1);
    if (rest.empty() || rest[0] == '-') return false;
    if (!parse_integer(rest, den) || den == 0) return false;
  }
  out = Rational(num, den);
  return true;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace bitml

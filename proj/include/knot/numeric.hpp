#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace knot {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct NumberParseError : std::runtime_error {
  explicit NumberParseError(const std::string& what) : std::runtime_error(what) {}
};

struct DivisionByZero : std::runtime_error {
  DivisionByZero() : std::runtime_error("division by zero") {}
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

inline bool is_digit_char(char c) { return detail::is_digit(c); }

// Characters that can appear inside an arithmetic operand token.
inline bool is_operand_char(char c) { return detail::is_digit(c) || c == '.'; }

// Parses a plain decimal string ("47", "-3.25", "0.5") into an exact rational.
inline BigRational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  std::size_t end = text.size();
  while (end > i && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
  text = text.substr(i, end - i);
  if (text.empty()) throw NumberParseError("empty number");

  bool negative = false;
  i = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    i = 1;
  }
  BigInt numerator = 0;
  BigInt denominator = 1;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_point) throw NumberParseError("two decimal points in " + std::string(text));
      seen_point = true;
      continue;
    }
    if (!detail::is_digit(c)) throw NumberParseError("bad digit in number: " + std::string(text));
    numerator = numerator * 10 + (c - '0');
    if (seen_point) denominator *= 10;
    any_digit = true;
  }
  if (!any_digit) throw NumberParseError("no digits in number: " + std::string(text));
  if (negative) numerator = -numerator;
  return BigRational(numerator, denominator);
}

inline bool looks_like_number(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  std::size_t end = text.size();
  while (end > i && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
  if (i >= end) return false;
  if (text[i] == '+' || text[i] == '-') ++i;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < end; ++i) {
    if (text[i] == '.') {
      if (seen_point) return false;
      seen_point = true;
    } else if (detail::is_digit(text[i])) {
      any_digit = true;
    } else {
      return false;
    }
  }
  return any_digit;
}

// Rounds to two decimal places, ties away from zero.
inline BigRational round_two_places(const BigRational& value) {
  BigInt n = boost::multiprecision::numerator(value) * 100;
  BigInt d = boost::multiprecision::denominator(value);
  bool negative = n < 0;
  if (negative) n = -n;
  BigInt q = n / d;
  BigInt r = n % d;
  if (r * 2 >= d) ++q;
  if (negative) q = -q;
  return BigRational(q, 100);
}

// Renders a rational whose denominator divides 100. Integral values print bare;
// fractional values print with up to two decimals, trailing zeros dropped.
inline std::string render_decimal(const BigRational& value) {
  BigInt num = boost::multiprecision::numerator(value);
  BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  BigInt scaled = num * 100;
  if (scaled % den != 0)
    throw NumberParseError("value not representable with two decimals");
  BigInt cents = scaled / den;
  bool negative = cents < 0;
  if (negative) cents = -cents;
  BigInt whole = cents / 100;
  int frac = static_cast<int>(cents % 100);
  std::string out = (negative ? "-" : "") + whole.str() + ".";
  if (frac % 10 == 0) {
    out += static_cast<char>('0' + frac / 10);
  } else {
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
  }
  return out;
}

// One elementary arithmetic step: exact op, then two-decimal rounding when the
// result is fractional.
inline BigRational elementary_op(char op, const BigRational& a, const BigRational& b) {
  BigRational result;
  switch (op) {
    case '+': result = a + b; break;
    case '-': result = a - b; break;
    case '*': result = a * b; break;
    case '/':
      if (b == 0) throw DivisionByZero();
      result = a / b;
      break;
    default: throw NumberParseError(std::string("unknown operator ") + op);
  }
  if (boost::multiprecision::denominator(result) != 1) result = round_two_places(result);
  return result;
}

// English rendering for 0..99, used by the counting-sort prompt patterns.
inline std::string english_number(int n) {
  static const char* units[] = {"zero", "one",  "two", "three", "four",
                                "five", "six",  "seven", "eight", "nine",
                                "ten",  "eleven", "twelve", "thirteen", "fourteen",
                                "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
  static const char* tens[] = {"",      "",      "twenty", "thirty", "forty",
                               "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n < 0 || n > 99) throw NumberParseError("english_number out of range");
  if (n < 20) return units[n];
  std::string out = tens[n / 10];
  if (n % 10 != 0) out += std::string("-") + units[n % 10];
  return out;
}

// Inverse of english_number; returns -1 when the word is not recognized.
inline int parse_english_number(std::string_view word) {
  for (int n = 0; n <= 99; ++n) {
    if (english_number(n) == word) return n;
  }
  return -1;
}

}  // namespace knot

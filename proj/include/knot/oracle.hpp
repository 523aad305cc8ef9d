#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "knot/backends.hpp"
#include "knot/numeric.hpp"
#include "knot/runtime.hpp"

namespace knot {

namespace oracle_detail {

inline bool strip_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

inline bool strip_suffix(std::string_view& s, std::string_view suffix) {
  if (s.size() < suffix.size() || s.substr(s.size() - suffix.size()) != suffix) return false;
  s.remove_suffix(suffix.size());
  return true;
}

inline std::string render_list(const std::vector<std::string>& elements) {
  std::string out = "[";
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (i) out += ", ";
    out += elements[i];
  }
  return out + "]";
}

inline std::optional<std::vector<BigInt>> parse_int_list(std::string_view text) {
  std::string trimmed = detail::trim_copy(text);
  if (trimmed.size() < 2 || trimmed.front() != '[' || trimmed.back() != ']')
    return std::nullopt;
  std::vector<BigInt> out;
  for (const auto& elem : parse_list(trimmed)) {
    if (!looks_like_number(elem) || elem.find('.') != std::string::npos) return std::nullopt;
    out.emplace_back(BigInt(elem));
  }
  return out;
}

inline std::string render_int_list(const std::vector<BigInt>& values) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (const auto& v : values) parts.push_back(v.str());
  return render_list(parts);
}

// 1. Add / Minus / Multiply / Divide with the rounding tail.
inline std::optional<std::string> try_arithmetic(std::string_view s) {
  static constexpr std::string_view kTail =
      ". Only output number. If contains floating point, round to two decimal places.";
  char op = 0;
  if (strip_prefix(s, "Add(")) op = '+';
  else if (strip_prefix(s, "Minus(")) op = '-';
  else if (strip_prefix(s, "Multiply(")) op = '*';
  else if (strip_prefix(s, "Divide(")) op = '/';
  else return std::nullopt;
  if (!strip_suffix(s, kTail) || !strip_suffix(s, ")")) return std::nullopt;
  std::size_t comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  std::string a = detail::trim_copy(s.substr(0, comma));
  std::string b = detail::trim_copy(s.substr(comma + 1));
  if (!looks_like_number(a) || !looks_like_number(b)) return std::nullopt;
  return render_decimal(elementary_op(op, parse_decimal(a), parse_decimal(b)));
}

// 2. Split an arithmetic expression into its operands.
inline std::optional<std::string> try_split_numbers(std::string_view s) {
  if (!strip_prefix(s, "Given ")) return std::nullopt;
  if (!strip_suffix(s, ", Split the numbers without operators. Only output list."))
    return std::nullopt;
  std::vector<std::string> operands;
  std::string current;
  for (char c : s) {
    if (is_operand_char(c)) {
      current += c;
    } else if (!current.empty()) {
      operands.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) operands.push_back(current);
  if (operands.empty()) return std::nullopt;
  return render_list(operands);
}

// 3. Split a quoted string by '+' into quoted parts.
inline std::optional<std::string> try_split_by_plus(std::string_view s) {
  if (!strip_prefix(s, "Split \"")) return std::nullopt;
  if (!strip_suffix(s, "\" by + and output in string format in an array.")) return std::nullopt;
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == '+') {
      parts.push_back("'" + detail::trim_copy(current) + "'");
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back("'" + detail::trim_copy(current) + "'");
  return render_list(parts);
}

// 4. Integer sums and floor division by ten for the carry chain.
inline std::optional<std::string> try_calculate(std::string_view s) {
  if (s.substr(0, 10) != "Calculate ") return std::nullopt;
  std::string_view rest = s.substr(10);
  std::string_view divide_tail = " divide 10, Only output integer.";
  if (rest.size() > divide_tail.size() &&
      rest.substr(rest.size() - divide_tail.size()) == divide_tail) {
    std::string value = detail::trim_copy(rest.substr(0, rest.size() - divide_tail.size()));
    if (!looks_like_number(value) || value.find('.') != std::string::npos) return std::nullopt;
    BigInt x(value);
    BigInt q = x / 10;
    if (x < 0 && x % 10 != 0) --q;  // floor, not trunc
    return q.str();
  }
  std::string_view sum_tail = ". Only output result.";
  if (rest.size() <= sum_tail.size() ||
      rest.substr(rest.size() - sum_tail.size()) != sum_tail)
    return std::nullopt;
  std::string_view expr = rest.substr(0, rest.size() - sum_tail.size());
  BigInt sum = 0;
  std::string current;
  for (char c : expr) {
    if (c == '+') {
      std::string term = detail::trim_copy(current);
      if (!looks_like_number(term) || term.find('.') != std::string::npos) return std::nullopt;
      sum += BigInt(term);
      current.clear();
    } else {
      current += c;
    }
  }
  std::string term = detail::trim_copy(current);
  if (!looks_like_number(term) || term.find('.') != std::string::npos) return std::nullopt;
  sum += BigInt(term);
  return sum.str();
}

// 6. Counting-sort bucket increment; two word orders occur in the scripts.
inline std::optional<std::string> try_increment(std::string_view s) {
  if (!strip_prefix(s, "Increment the count at index ")) return std::nullopt;
  if (!strip_suffix(s, ". Only output updated array.")) return std::nullopt;
  std::string_view array_part;
  std::string_view index_part;
  std::size_t marker = s.find(" in ");
  if (marker == std::string_view::npos) return std::nullopt;
  if (s.find(" (start from 0) in ") != std::string_view::npos) {
    std::size_t m = s.find(" (start from 0) in ");
    index_part = s.substr(0, m);
    array_part = s.substr(m + 19);
  } else {
    index_part = s.substr(0, marker);
    array_part = s.substr(marker + 4);
    if (!strip_suffix(array_part, " (index start from 0)")) return std::nullopt;
  }
  std::string idx_text = detail::trim_copy(index_part);
  if (!looks_like_number(idx_text) || idx_text.find('.') != std::string::npos)
    return std::nullopt;
  auto counts = parse_int_list(array_part);
  if (!counts) return std::nullopt;
  long idx = std::stol(idx_text);
  if (idx < 0 || idx >= static_cast<long>(counts->size())) return std::nullopt;
  ++(*counts)[static_cast<std::size_t>(idx)];
  return render_int_list(*counts);
}

// 7. Count array rendered as English words.
inline std::optional<std::string> try_convert_english(std::string_view s) {
  if (!strip_prefix(s, "Convert ")) return std::nullopt;
  if (!strip_suffix(s, " in English. Output an array.")) return std::nullopt;
  auto counts = parse_int_list(s);
  if (!counts) return std::nullopt;
  std::vector<std::string> words;
  for (const auto& c : *counts) {
    if (c < 0 || c > 99) return std::nullopt;
    words.push_back(english_number(static_cast<int>(c)));
  }
  return render_list(words);
}

// 8. Expand "two 0s, one 1s, ..." back into a digit array.
inline std::optional<std::string> try_expand_counts(std::string_view s) {
  if (!strip_prefix(s, "The array should contain ")) return std::nullopt;
  if (!strip_suffix(s, ". Output in array format.")) return std::nullopt;
  std::vector<std::string> digits;
  for (const auto& item : parse_list(std::string("[") + std::string(s) + "]")) {
    std::size_t space = item.rfind(' ');
    if (space == std::string::npos) return std::nullopt;
    std::string word = detail::trim_copy(item.substr(0, space));
    std::string digit = detail::trim_copy(item.substr(space + 1));
    if (digit.size() != 2 || digit[1] != 's' || !is_digit_char(digit[0]))
      return std::nullopt;
    int count = parse_english_number(word);
    if (count < 0) return std::nullopt;
    for (int i = 0; i < count; ++i) digits.push_back(std::string(1, digit[0]));
  }
  return render_list(digits);
}

// 9. Merge two sorted arrays, or flatten many values into one array.
inline std::optional<std::string> try_combine(std::string_view s) {
  if (!strip_prefix(s, "Combine ")) return std::nullopt;
  std::string_view ascending_tail = " in ascending order. Only output array.";
  if (s.size() > ascending_tail.size() &&
      s.substr(s.size() - ascending_tail.size()) == ascending_tail) {
    std::string_view mid = s.substr(0, s.size() - ascending_tail.size());
    std::size_t and_pos = mid.find("] and [");
    if (and_pos == std::string_view::npos) return std::nullopt;
    auto a = parse_int_list(mid.substr(0, and_pos + 1));
    auto b = parse_int_list(mid.substr(and_pos + 6));
    if (!a || !b) return std::nullopt;
    std::vector<BigInt> merged;
    merged.reserve(a->size() + b->size());
    std::merge(a->begin(), a->end(), b->begin(), b->end(), std::back_inserter(merged));
    return render_int_list(merged);
  }
  bool repeated_tail = false;
  std::string_view body = s;
  if (strip_suffix(body, " in one array. Repeated is allowed.")) {
    repeated_tail = true;
  } else if (!strip_suffix(body, " in one array.")) {
    return std::nullopt;
  }
  (void)repeated_tail;
  std::vector<std::string> flat;
  for (const auto& part : parse_list(std::string("[") + std::string(body) + "]")) {
    std::string trimmed = detail::trim_copy(part);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '[' || trimmed == "]") {
      if (trimmed == "[]") continue;
      for (const auto& elem : parse_list(trimmed))
        if (!elem.empty()) flat.push_back(elem);
    } else {
      flat.push_back(trimmed);
    }
  }
  return render_list(flat);
}

// 10. Single-element set membership.
inline std::optional<std::string> try_intersection(std::string_view s) {
  if (!strip_prefix(s, "Find the intersection for ")) return std::nullopt;
  if (!strip_suffix(s, ". Output [] if mutually exclusive.")) return std::nullopt;
  std::size_t and_pos = s.find("] and [");
  if (and_pos == std::string_view::npos) return std::nullopt;
  std::string left = detail::trim_copy(s.substr(0, and_pos + 1));
  std::string right = detail::trim_copy(s.substr(and_pos + 6));
  auto candidates = parse_list(left);
  auto members = parse_list(right);
  if (candidates.size() != 1) return std::nullopt;
  const std::string& x = candidates.front();
  for (const auto& m : members)
    if (m == x) return "[" + x + "]";
  return "[]";
}

// 11. Concatenated digits into an integer; leading zeros stripped.
inline std::optional<std::string> try_convert_integer(std::string_view s) {
  if (!strip_prefix(s, "Convert into an integer:")) return std::nullopt;
  std::string digits;
  for (char c : s) {
    if (c == ' ' || c == '\t') continue;
    if (!is_digit_char(c)) return std::nullopt;
    digits += c;
  }
  if (digits.empty()) return std::nullopt;
  std::size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return "0";
  return digits.substr(first);
}

}  // namespace oracle_detail

// Interprets the elementary prompt patterns deterministically, standing in
// for a live model in offline runs. Prompts outside the pattern set raise
// UnrecognizedPattern.
inline std::string oracle_infer(const std::string& prompt) {
  std::string s = detail::trim_copy(prompt);
  using namespace oracle_detail;
  if (auto r = try_arithmetic(s)) return *r;
  if (auto r = try_split_numbers(s)) return *r;
  if (auto r = try_split_by_plus(s)) return *r;
  if (auto r = try_calculate(s)) return *r;
  if (s == "Initialize an array of size 10 to zero.")
    return "[0, 0, 0, 0, 0, 0, 0, 0, 0, 0]";
  if (auto r = try_increment(s)) return *r;
  if (auto r = try_convert_english(s)) return *r;
  if (auto r = try_expand_counts(s)) return *r;
  if (auto r = try_combine(s)) return *r;
  if (auto r = try_intersection(s)) return *r;
  if (auto r = try_convert_integer(s)) return *r;
  throw UnrecognizedPattern(prompt);
}

class OracleBackend : public Backend {
 public:
  InferResult infer(const std::string& prompt) override {
    std::string response = oracle_infer(prompt);
    return {response, {estimate_tokens(prompt), estimate_tokens(response), true}};
  }
};

}  // namespace knot

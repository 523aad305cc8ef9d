#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace knot::lwt {

// One input-field reference: a numbered or named source plus a chain of
// python-style indices. An empty index_path means full-output substitution.
struct Placeholder {
  bool numbered = true;
  int index = -1;         // valid when numbered
  std::string name;       // valid when !numbered
  std::vector<int> index_path;

  std::string serialize() const {
    std::string out = "{(";
    out += numbered ? std::to_string(index) : name;
    out += ")}";
    for (int m : index_path) {
      out += "[" + std::to_string(m) + "]";
    }
    return out;
  }

  friend bool operator==(const Placeholder&, const Placeholder&) = default;
};

using Segment = std::variant<std::string, Placeholder>;

inline bool is_ref(const Segment& s) { return std::holds_alternative<Placeholder>(s); }

struct LwtInstruction {
  int index = 0;  // the (n) label
  std::vector<Segment> segments;

  std::string body() const {
    std::string out;
    for (const auto& seg : segments) {
      if (auto* lit = std::get_if<std::string>(&seg)) {
        out += *lit;
      } else {
        out += std::get<Placeholder>(seg).serialize();
      }
    }
    return out;
  }

  std::string serialize() const {
    return "(" + std::to_string(index) + ")=LLM(\"" + body() + "\")";
  }

  std::vector<const Placeholder*> refs() const {
    std::vector<const Placeholder*> out;
    for (const auto& seg : segments) {
      if (auto* ph = std::get_if<Placeholder>(&seg)) out.push_back(ph);
    }
    return out;
  }
};

struct LwtScript {
  struct Line {
    bool is_instruction = false;
    std::size_t instruction_pos = 0;  // into instructions, when is_instruction
    std::string raw;                  // verbatim text otherwise
  };

  std::vector<LwtInstruction> instructions;
  std::set<std::string> named_inputs;
  std::vector<Line> lines;
  bool trailing_newline = false;
  std::vector<std::string> skipped_lines;  // non-blank lines with no instruction shape

  const LwtInstruction* find(int index) const {
    for (const auto& ins : instructions)
      if (ins.index == index) return &ins;
    return nullptr;
  }

  std::string serialize() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) out += '\n';
      out += lines[i].is_instruction ? instructions[lines[i].instruction_pos].serialize()
                                     : lines[i].raw;
    }
    if (trailing_newline) out += '\n';
    return out;
  }
};

enum class ParseErrorKind {
  MalformedPlaceholder,
  DuplicateIndex,
  NonMonotoneIndex,
  EmptyScript,
};

struct ParseError : std::runtime_error {
  ParseErrorKind kind;
  std::size_t line_number;  // 1-based, 0 when not line-specific

  ParseError(ParseErrorKind k, std::size_t line, const std::string& what)
      : std::runtime_error(what), kind(k), line_number(line) {}
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }

// Canonical non-negative integer: no leading zeros except "0" itself.
inline bool is_canonical_uint(std::string_view s) {
  if (s.empty()) return false;
  if (s.size() > 1 && s[0] == '0') return false;
  return std::all_of(s.begin(), s.end(), is_digit);
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !is_alpha(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_alnum);
}

// Parses trailing [m] index operators at position pos; only canonical integers
// are consumed, anything else stays literal text.
inline std::vector<int> parse_index_chain(std::string_view body, std::size_t& pos) {
  std::vector<int> path;
  while (pos < body.size() && body[pos] == '[') {
    std::size_t close = body.find(']', pos);
    if (close == std::string_view::npos) break;
    std::string_view inner = body.substr(pos + 1, close - pos - 1);
    std::string_view digits = inner;
    bool negative = false;
    if (!digits.empty() && digits[0] == '-') {
      negative = true;
      digits.remove_prefix(1);
    }
    if (!is_canonical_uint(digits)) break;
    if (negative && digits == "0") break;  // "-0" stays literal
    if (digits.size() > 9) break;          // avoid overflow on absurd indices
    int value = 0;
    for (char c : digits) value = value * 10 + (c - '0');
    path.push_back(negative ? -value : value);
    pos = close + 1;
  }
  return path;
}

inline std::vector<Segment> parse_body(std::string_view body, std::size_t line_number) {
  std::vector<Segment> segments;
  std::string literal;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!literal.empty()) {
      segments.emplace_back(std::move(literal));
      literal.clear();
    }
  };
  while (pos < body.size()) {
    if (body[pos] == '{' && pos + 1 < body.size() && body[pos + 1] == '(') {
      std::size_t close = body.find(")}", pos + 2);
      if (close == std::string_view::npos)
        throw ParseError(ParseErrorKind::MalformedPlaceholder, line_number,
                         "unterminated placeholder at line " + std::to_string(line_number));
      std::string_view inner = body.substr(pos + 2, close - pos - 2);
      Placeholder ph;
      if (is_canonical_uint(inner)) {
        ph.numbered = true;
        ph.index = 0;
        for (char c : inner) ph.index = ph.index * 10 + (c - '0');
      } else if (is_identifier(inner)) {
        ph.numbered = false;
        ph.name = std::string(inner);
      } else {
        throw ParseError(ParseErrorKind::MalformedPlaceholder, line_number,
                         "bad placeholder source '" + std::string(inner) + "' at line " +
                             std::to_string(line_number));
      }
      pos = close + 2;
      ph.index_path = parse_index_chain(body, pos);
      flush();
      segments.emplace_back(std::move(ph));
    } else {
      literal += body[pos];
      ++pos;
    }
  }
  flush();
  return segments;
}

// A line is an instruction iff it has exactly the shape (k)=LLM("...").
inline std::optional<LwtInstruction> parse_instruction_line(std::string_view line,
                                                            std::size_t line_number) {
  if (line.empty() || line[0] != '(') return std::nullopt;
  std::size_t p = 1;
  while (p < line.size() && is_digit(line[p])) ++p;
  if (p == 1) return std::nullopt;
  std::string_view digits = line.substr(1, p - 1);
  if (!is_canonical_uint(digits) || digits.size() > 9) return std::nullopt;
  static constexpr std::string_view kOpen = ")=LLM(\"";
  if (line.substr(p, kOpen.size()) != kOpen) return std::nullopt;
  static constexpr std::string_view kClose = "\")";
  if (line.size() < p + kOpen.size() + kClose.size()) return std::nullopt;
  if (line.substr(line.size() - kClose.size()) != kClose) return std::nullopt;
  std::size_t body_begin = p + kOpen.size();
  std::string_view body = line.substr(body_begin, line.size() - kClose.size() - body_begin);
  LwtInstruction ins;
  ins.index = 0;
  for (char c : digits) ins.index = ins.index * 10 + (c - '0');
  ins.segments = parse_body(body, line_number);
  return ins;
}

}  // namespace detail

// Parses a whole script. Lines that are not instruction-shaped are kept
// verbatim (and reported in skipped_lines when non-blank) so serialize() can
// reproduce the input byte-for-byte.
inline LwtScript parse_script(std::string_view text) {
  LwtScript script;
  script.trailing_newline = !text.empty() && text.back() == '\n';
  if (script.trailing_newline) text.remove_suffix(1);

  std::size_t start = 0;
  std::size_t line_number = 0;
  int last_index = -1;
  std::set<int> seen;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    ++line_number;
    if (auto ins = detail::parse_instruction_line(line, line_number)) {
      if (seen.count(ins->index))
        throw ParseError(ParseErrorKind::DuplicateIndex, line_number,
                         "duplicate instruction index (" + std::to_string(ins->index) + ")");
      if (ins->index <= last_index)
        throw ParseError(ParseErrorKind::NonMonotoneIndex, line_number,
                         "instruction index (" + std::to_string(ins->index) +
                             ") not strictly increasing");
      seen.insert(ins->index);
      last_index = ins->index;
      for (const auto* ph : ins->refs()) {
        if (!ph->numbered) script.named_inputs.insert(ph->name);
      }
      script.lines.push_back({true, script.instructions.size(), ""});
      script.instructions.push_back(std::move(*ins));
    } else {
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos)
        script.skipped_lines.emplace_back(line);
      script.lines.push_back({false, 0, std::string(line)});
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (script.instructions.empty())
    throw ParseError(ParseErrorKind::EmptyScript, 0, "no instruction lines found");
  return script;
}

enum class ValidationErrorKind {
  ForwardReference,
  SelfReference,
  UndefinedNamedInput,
};

inline std::string to_string(ValidationErrorKind k) {
  switch (k) {
    case ValidationErrorKind::ForwardReference: return "ForwardReference";
    case ValidationErrorKind::SelfReference: return "SelfReference";
    case ValidationErrorKind::UndefinedNamedInput: return "UndefinedNamedInput";
  }
  return "?";
}

struct ValidationReport {
  struct Error {
    int instruction_index;
    ValidationErrorKind kind;
    std::string message;
  };
  struct Warning {
    int instruction_index;  // -1 for script-level warnings
    std::string message;
  };
  std::vector<Error> errors;
  std::vector<Warning> warnings;

  bool ok() const { return errors.empty(); }
};

inline ValidationReport validate_script(const LwtScript& script,
                                        const std::set<std::string>& bindings) {
  ValidationReport report;
  std::set<int> referenced;
  std::set<int> defined;
  for (const auto& ins : script.instructions) defined.insert(ins.index);

  for (const auto& ins : script.instructions) {
    for (const auto* ph : ins.refs()) {
      if (ph->numbered) {
        if (ph->index == ins.index) {
          report.errors.push_back({ins.index, ValidationErrorKind::SelfReference,
                                   "instruction (" + std::to_string(ins.index) +
                                       ") references itself"});
        } else if (ph->index > ins.index) {
          report.errors.push_back({ins.index, ValidationErrorKind::ForwardReference,
                                   "instruction (" + std::to_string(ins.index) +
                                       ") references later instruction (" +
                                       std::to_string(ph->index) + ")"});
        } else if (!defined.count(ph->index)) {
          report.warnings.push_back({ins.index, "reference to missing instruction (" +
                                                    std::to_string(ph->index) + ")"});
        }
        referenced.insert(ph->index);
      } else if (!bindings.count(ph->name)) {
        report.errors.push_back({ins.index, ValidationErrorKind::UndefinedNamedInput,
                                 "named input '" + ph->name + "' has no binding"});
      }
    }
  }
  if (!script.instructions.empty() && script.instructions.front().index != 0)
    report.warnings.push_back({-1, "numbering starts at (" +
                                       std::to_string(script.instructions.front().index) +
                                       "), not (0)"});
  for (std::size_t i = 0; i + 1 < script.instructions.size(); ++i) {
    int idx = script.instructions[i].index;
    if (!referenced.count(idx))
      report.warnings.push_back({idx, "output of (" + std::to_string(idx) +
                                          ") is never referenced"});
  }
  for (const auto& skipped : script.skipped_lines)
    report.warnings.push_back({-1, "skipped non-instruction line: " + skipped});
  return report;
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string path_label(const std::vector<int>& path) {
  std::string out;
  for (int m : path) out += "[" + std::to_string(m) + "]";
  return out;
}

}  // namespace detail

// Deterministic Graphviz rendering of the message-passing network: one node
// per instruction plus one per named input, one edge per reference.
inline std::string to_dot(const LwtScript& script) {
  std::ostringstream out;
  out << "digraph lwt {\n";
  out << "  rankdir=LR;\n";
  for (const auto& name : script.named_inputs)
    out << "  \"" << detail::dot_escape(name) << "\" [shape=box];\n";
  for (const auto& ins : script.instructions)
    out << "  \"" << ins.index << "\" [label=\"(" << ins.index << ")\"];\n";
  for (const auto& ins : script.instructions) {
    for (const auto* ph : ins.refs()) {
      out << "  \"" << (ph->numbered ? std::to_string(ph->index) : detail::dot_escape(ph->name))
          << "\" -> \"" << ins.index << "\"";
      if (!ph->index_path.empty())
        out << " [label=\"" << detail::path_label(ph->index_path) << "\"]";
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

inline nlohmann::json to_json(const Placeholder& ph) {
  nlohmann::json j;
  if (ph.numbered)
    j["source"] = ph.index;
  else
    j["source"] = ph.name;
  j["index_path"] = ph.index_path;
  return j;
}

inline nlohmann::json to_json(const LwtScript& script) {
  nlohmann::json instructions = nlohmann::json::array();
  for (const auto& ins : script.instructions) {
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& seg : ins.segments) {
      if (auto* lit = std::get_if<std::string>(&seg)) {
        segments.push_back({{"literal", *lit}});
      } else {
        segments.push_back(to_json(std::get<Placeholder>(seg)));
      }
    }
    instructions.push_back({{"index", ins.index}, {"segments", std::move(segments)}});
  }
  return {{"instructions", std::move(instructions)},
          {"named_inputs", script.named_inputs}};
}

}  // namespace knot::lwt

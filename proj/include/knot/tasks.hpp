#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "knot/numeric.hpp"
#include "knot/runtime.hpp"

namespace knot::tasks {

enum class TaskName { Yelp, Keyword, Sorting, SetIntersection, Arithmetic, LargeDigit };

inline std::string to_string(TaskName t) {
  switch (t) {
    case TaskName::Yelp: return "yelp";
    case TaskName::Keyword: return "keyword";
    case TaskName::Sorting: return "sorting";
    case TaskName::SetIntersection: return "set_intersection";
    case TaskName::Arithmetic: return "arithmetic";
    case TaskName::LargeDigit: return "large_digit";
  }
  return "?";
}

struct UnknownTask : std::runtime_error {
  explicit UnknownTask(const std::string& name)
      : std::runtime_error("unknown task '" + name + "'") {}
};

struct UnsupportedSize : std::runtime_error {
  UnsupportedSize(TaskName task, int size)
      : std::runtime_error("task " + to_string(task) + " does not support size " +
                           std::to_string(size)) {}
};

inline TaskName task_from_string(const std::string& name) {
  if (name == "yelp") return TaskName::Yelp;
  if (name == "keyword") return TaskName::Keyword;
  if (name == "sorting") return TaskName::Sorting;
  if (name == "set_intersection" || name == "set") return TaskName::SetIntersection;
  if (name == "arithmetic") return TaskName::Arithmetic;
  if (name == "large_digit") return TaskName::LargeDigit;
  throw UnknownTask(name);
}

inline const std::vector<TaskName>& all_tasks() {
  static const std::vector<TaskName> tasks = {
      TaskName::Yelp,     TaskName::Keyword,    TaskName::Sorting,
      TaskName::SetIntersection, TaskName::Arithmetic, TaskName::LargeDigit};
  return tasks;
}

inline std::vector<int> supported_sizes(TaskName task) {
  switch (task) {
    case TaskName::Yelp: return {10};
    case TaskName::Keyword: return {14, 15, 16, 17, 18, 19, 20};
    case TaskName::Sorting: return {16, 32, 64};
    case TaskName::SetIntersection: return {32, 64, 128};
    case TaskName::Arithmetic: return {8, 16, 32};
    case TaskName::LargeDigit: return {8, 16, 32};
  }
  return {};
}

struct TaskInstance {
  TaskName task;
  int size = 0;
  std::uint64_t seed = 0;

  std::vector<int> numbers;                           // sorting
  std::vector<int> set1, set2;                        // set intersection
  std::vector<int> operands;                          // arithmetic
  std::vector<char> operators;                        // arithmetic, size-1 entries
  std::string addend_a, addend_b;                     // large digit
  std::vector<std::pair<std::string, bool>> reviews;  // yelp: text, positive?
  std::vector<std::string> sentences;                 // keyword
  std::vector<std::string> mentions;                  // keyword ground truth, in order
};

struct GenerateOptions {
  bool two_digit_operands = false;  // arithmetic: 10..99 instead of 1..9
};

namespace detail {

// splitmix64: small, seedable, identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound); bound must be positive.
  int below(int bound) { return static_cast<int>(next() % static_cast<std::uint64_t>(bound)); }

 private:
  std::uint64_t state_;
};

// size distinct values from [0, range), in random order.
inline std::vector<int> sample_distinct(Rng& rng, int size, int range) {
  std::vector<int> pool(range);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < size; ++i) {
    int j = i + rng.below(range - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  return pool;
}

inline const std::vector<std::string>& positive_reviews() {
  static const std::vector<std::string> corpus = {
      "Absolutely wonderful experience, the staff went out of their way to make us feel welcome.",
      "The food was fantastic and arrived quickly. We will definitely be coming back soon.",
      "Best brunch spot in town. Every dish we tried was fresh, flavorful, and beautifully plated.",
      "Five stars. The service was impeccable and the atmosphere was warm and inviting.",
      "I loved everything about this place, from the friendly greeting to the perfect espresso.",
      "Outstanding value and generous portions. The kitchen clearly cares about quality.",
      "A hidden gem. The tasting menu was creative and every course exceeded expectations.",
      "The bakery smells amazing and the pastries taste even better. Highly recommended.",
      "Wonderful neighborhood bar with great live music and bartenders who remember your name.",
      "Superb from start to finish. Clean, comfortable, and the desserts were unforgettable.",
      "Great little shop with helpful owners and fair prices. Everything works perfectly.",
      "Delightful dinner. The seasonal specials were inspired and the wine pairings spot on.",
  };
  return corpus;
}

inline const std::vector<std::string>& negative_reviews() {
  static const std::vector<std::string> corpus = {
      "Terrible experience. We waited over an hour and the food arrived cold and bland.",
      "The staff were rude and dismissive. I will never set foot in this place again.",
      "Overpriced and underwhelming. The portions were tiny and the table was sticky.",
      "One star. The bathroom was filthy and our order was wrong twice in a row.",
      "Awful service. The waiter ignored us all evening and the bill had extra charges.",
      "The worst meal I have had in years. Everything tasted like it came from a freezer.",
      "Do not bother. Loud, crowded, and the kitchen managed to burn a simple sandwich.",
      "Disappointing from start to finish. The manager refused to fix an obvious mistake.",
      "The place smelled strange and the glasses were dirty. We left before ordering mains.",
      "Horrible. They cancelled our reservation at the door and offered no apology at all.",
      "Stale bread, watery coffee, and a cashier who acted like we were a burden.",
      "Broken chairs, flickering lights, and food poisoning to top it off. Avoid this place.",
  };
  return corpus;
}

inline const std::vector<std::string>& country_list() {
  static const std::vector<std::string> countries = {
      "Canada", "Australia", "Brazil",  "Italy",   "Greece",  "Norway",
      "Sweden", "Mexico",    "Cuba",    "Japan",   "France",  "Spain",
      "Egypt",  "Kenya",     "India",   "Thailand", "Peru",    "Chile",
      "Portugal", "Germany", "Iceland", "Morocco", "Vietnam", "Argentina",
  };
  return countries;
}

inline const std::vector<std::string>& traveler_names() {
  static const std::vector<std::string> names = {"John", "Sarah", "Elena", "Marcus",
                                                 "Priya", "Tomas", "Amira", "Liam"};
  return names;
}

}  // namespace detail

inline TaskInstance generate(TaskName task, int size, std::uint64_t seed,
                             const GenerateOptions& opts = {}) {
  auto sizes = supported_sizes(task);
  if (std::find(sizes.begin(), sizes.end(), size) == sizes.end())
    throw UnsupportedSize(task, size);

  TaskInstance inst;
  inst.task = task;
  inst.size = size;
  inst.seed = seed;
  // Domain-separate the stream per (task, size) so grids do not alias.
  detail::Rng rng(seed ^ (static_cast<std::uint64_t>(task) << 56) ^
                  (static_cast<std::uint64_t>(size) << 40));

  switch (task) {
    case TaskName::Sorting:
      for (int i = 0; i < size; ++i) inst.numbers.push_back(rng.below(10));
      break;
    case TaskName::SetIntersection:
      inst.set1 = detail::sample_distinct(rng, size, 2 * size);
      inst.set2 = detail::sample_distinct(rng, size, 2 * size);
      break;
    case TaskName::Arithmetic: {
      static constexpr char kOps[] = {'+', '-', '*', '/'};
      for (int i = 0; i < size; ++i)
        inst.operands.push_back(opts.two_digit_operands ? 10 + rng.below(90)
                                                        : 1 + rng.below(9));
      for (int i = 0; i + 1 < size; ++i) inst.operators.push_back(kOps[rng.below(4)]);
      break;
    }
    case TaskName::LargeDigit: {
      auto digits = [&](std::string& out) {
        out += static_cast<char>('1' + rng.below(9));
        for (int i = 1; i < size; ++i) out += static_cast<char>('0' + rng.below(10));
      };
      digits(inst.addend_a);
      digits(inst.addend_b);
      break;
    }
    case TaskName::Yelp: {
      const auto& pos = detail::positive_reviews();
      const auto& neg = detail::negative_reviews();
      for (int i = 0; i < size; ++i) {
        bool positive = rng.below(2) == 1;
        const auto& corpus = positive ? pos : neg;
        inst.reviews.emplace_back(corpus[rng.below(static_cast<int>(corpus.size()))], positive);
      }
      break;
    }
    case TaskName::Keyword: {
      const auto& countries = detail::country_list();
      const auto& names = detail::traveler_names();
      auto country = [&]() -> const std::string& {
        return countries[rng.below(static_cast<int>(countries.size()))];
      };
      for (int i = 0; i < size; ++i) {
        int shape = rng.below(4);
        const std::string& who = names[rng.below(static_cast<int>(names.size()))];
        std::string sentence;
        if (shape == 0) {
          const std::string& a = country();
          sentence = who + " spent the whole summer exploring the landscapes of " + a + ".";
          inst.mentions.push_back(a);
        } else if (shape == 1) {
          const std::string& a = country();
          const std::string& b = country();
          sentence = who + " compared the street food of " + a + " with the markets of " + b + ".";
          inst.mentions.push_back(a);
          inst.mentions.push_back(b);
        } else if (shape == 2) {
          const std::string& a = country();
          sentence = "A postcard from " + a + " was pinned above the desk of " + who + ".";
          inst.mentions.push_back(a);
        } else {
          sentence = "The afternoon passed quietly over coffee and old photographs.";
        }
        inst.sentences.push_back(std::move(sentence));
      }
      break;
    }
  }
  return inst;
}

namespace detail {

inline std::string render_int_array(const std::vector<int>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

}  // namespace detail

inline std::string render_expression(const TaskInstance& inst) {
  std::string out = std::to_string(inst.operands.at(0));
  for (std::size_t i = 0; i < inst.operators.size(); ++i) {
    out += inst.operators[i];
    out += std::to_string(inst.operands[i + 1]);
  }
  return out;
}

// Query text plus the named-input bindings handed to the executor.
inline std::pair<std::string, Bindings> render(const TaskInstance& inst) {
  switch (inst.task) {
    case TaskName::Sorting: {
      std::string q = detail::render_int_array(inst.numbers);
      return {q, {{"input", q}}};
    }
    case TaskName::SetIntersection: {
      std::string s1 = detail::render_int_array(inst.set1);
      std::string s2 = detail::render_int_array(inst.set2);
      return {"Set1: " + s1 + "\nSet2: " + s2, {{"Set1", s1}, {"Set2", s2}}};
    }
    case TaskName::Arithmetic: {
      std::string q = render_expression(inst);
      return {q, {{"input", q}}};
    }
    case TaskName::LargeDigit: {
      std::string q = inst.addend_a + "+" + inst.addend_b;
      return {q, {{"input", q}}};
    }
    case TaskName::Yelp: {
      std::string q = "[";
      for (std::size_t i = 0; i < inst.reviews.size(); ++i) {
        if (i) q += ", ";
        q += "'" + inst.reviews[i].first + "'";
      }
      q += "]";
      return {q, {{"input", q}}};
    }
    case TaskName::Keyword: {
      std::string q;
      for (std::size_t i = 0; i < inst.sentences.size(); ++i) {
        if (i) q += " ";
        q += inst.sentences[i];
      }
      return {q, {{"input", q}}};
    }
  }
  throw UnknownTask("?");
}

enum class RoundingPolicy { PerOperation, FinalOnly };

// Left-to-right evaluation with multiplication and division first, mirroring
// the task context description. PerOperation rounds every elementary result
// to two decimals, matching what the executed script computes step by step.
inline BigRational evaluate_expression(const std::vector<int>& operands,
                                       const std::vector<char>& operators,
                                       RoundingPolicy policy = RoundingPolicy::PerOperation) {
  if (operands.empty()) throw NumberParseError("empty expression");
  auto apply = [&](char op, const BigRational& a, const BigRational& b) {
    if (policy == RoundingPolicy::PerOperation) return elementary_op(op, a, b);
    if (op == '/' && b == 0) throw DivisionByZero();
    switch (op) {
      case '+': return BigRational(a + b);
      case '-': return BigRational(a - b);
      case '*': return BigRational(a * b);
      default: return BigRational(a / b);
    }
  };

  std::vector<BigRational> terms;
  std::vector<char> term_signs;  // sign joining term i to term i+1
  BigRational current = operands[0];
  for (std::size_t i = 0; i < operators.size(); ++i) {
    char op = operators[i];
    if (op == '*' || op == '/') {
      current = apply(op, current, BigRational(operands[i + 1]));
    } else {
      terms.push_back(current);
      term_signs.push_back(op);
      current = operands[i + 1];
    }
  }
  terms.push_back(current);

  BigRational acc = terms[0];
  for (std::size_t i = 0; i < term_signs.size(); ++i)
    acc = apply(term_signs[i], acc, terms[i + 1]);
  if (policy == RoundingPolicy::FinalOnly &&
      boost::multiprecision::denominator(acc) != 1)
    acc = round_two_places(acc);
  return acc;
}

inline std::string keyword_canonical(const std::vector<std::string>& words) {
  std::string out = "[";
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ", ";
    std::string w = words[i];
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out += w;
  }
  return out + "]";
}

// Canonical expected answer, computed without any LLM.
inline std::string ground_truth(const TaskInstance& inst,
                                RoundingPolicy policy = RoundingPolicy::PerOperation) {
  switch (inst.task) {
    case TaskName::Sorting: {
      std::vector<int> sorted = inst.numbers;
      std::sort(sorted.begin(), sorted.end());
      return detail::render_int_array(sorted);
    }
    case TaskName::SetIntersection: {
      std::set<int> second(inst.set2.begin(), inst.set2.end());
      std::vector<int> result;
      for (int v : inst.set1)
        if (second.count(v)) result.push_back(v);
      return detail::render_int_array(result);
    }
    case TaskName::Arithmetic:
      return render_decimal(evaluate_expression(inst.operands, inst.operators, policy));
    case TaskName::LargeDigit:
      return (BigInt(inst.addend_a) + BigInt(inst.addend_b)).str();
    case TaskName::Yelp: {
      int positives = 0;
      for (const auto& [text, positive] : inst.reviews) positives += positive ? 1 : 0;
      return std::to_string(positives);
    }
    case TaskName::Keyword:
      return keyword_canonical(inst.mentions);
  }
  throw UnknownTask("?");
}

// Exact-match normalization. Returns nullopt for Unparseable answers.
inline std::optional<std::string> normalize(TaskName task, std::string_view raw) {
  std::string s = knot::detail::trim_copy(raw);
  switch (task) {
    case TaskName::Arithmetic:
    case TaskName::LargeDigit:
    case TaskName::Yelp: {
      if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
        auto elems = parse_list(s);
        if (elems.size() != 1) return std::nullopt;
        s = elems.front();
      }
      if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                            (s.front() == '"' && s.back() == '"')))
        s = knot::detail::trim_copy(s.substr(1, s.size() - 2));
      if (!looks_like_number(s)) return std::nullopt;
      try {
        return render_decimal(round_two_places(parse_decimal(s)));
      } catch (const NumberParseError&) {
        return std::nullopt;
      }
    }
    case TaskName::Sorting:
    case TaskName::SetIntersection: {
      if (s.empty()) return std::nullopt;
      if (s.front() != '[' || s.back() != ']') return std::nullopt;
      std::vector<std::string> canonical;
      if (s != "[]") {
        for (const auto& elem : parse_list(s)) {
          if (!looks_like_number(elem)) return std::nullopt;
          try {
            canonical.push_back(render_decimal(parse_decimal(elem)));
          } catch (const NumberParseError&) {
            return std::nullopt;
          }
        }
      }
      std::string out = "[";
      for (std::size_t i = 0; i < canonical.size(); ++i) {
        if (i) out += ", ";
        out += canonical[i];
      }
      return out + "]";
    }
    case TaskName::Keyword: {
      if (s.empty() || s.front() != '[' || s.back() != ']') return std::nullopt;
      std::vector<std::string> words;
      if (s != "[]")
        for (const auto& elem : parse_list(s)) words.push_back(elem);
      return keyword_canonical(words);
    }
  }
  return std::nullopt;
}

namespace detail {

inline std::string arithmetic_tail() {
  return ". Only output number. If contains floating point, round to two decimal places.\")";
}

inline std::string op_name(char op) {
  switch (op) {
    case '+': return "Add";
    case '-': return "Minus";
    case '*': return "Multiply";
    default: return "Divide";
  }
}

}  // namespace detail

// The concrete LWT script the translation stage would emit for this instance,
// following the strategies of the bundled task examples. Offline runs execute
// these against the elementary-operation oracle.
inline std::string fixture_script(const TaskInstance& inst) {
  std::ostringstream out;
  switch (inst.task) {
    case TaskName::Arithmetic: {
      out << "(0)=LLM(\"Given {(input)}, Split the numbers without operators. "
             "Only output list.\")\n";
      int next = 1;
      // multiplicative groups first, then the additive chain left to right
      struct Term {
        std::string ref;
        char sign;  // sign joining the previous term to this one
      };
      std::vector<Term> terms;
      std::size_t i = 0;
      char pending_sign = '+';
      while (i < inst.operands.size()) {
        std::size_t j = i;
        while (j < inst.operators.size() && (inst.operators[j] == '*' || inst.operators[j] == '/'))
          ++j;
        if (j == i) {
          terms.push_back({"{(0)}[" + std::to_string(i) + "]", pending_sign});
        } else {
          std::string ref = "{(0)}[" + std::to_string(i) + "]";
          for (std::size_t k = i; k < j; ++k) {
            out << "(" << next << ")=LLM(\"" << detail::op_name(inst.operators[k]) << "(" << ref
                << ", {(0)}[" << (k + 1) << "])" << detail::arithmetic_tail() << "\n";
            ref = "{(" + std::to_string(next) + ")}";
            ++next;
          }
          terms.push_back({ref, pending_sign});
        }
        if (j < inst.operators.size()) pending_sign = inst.operators[j];
        i = j + 1;
      }
      std::string acc = terms[0].ref;
      for (std::size_t t = 1; t < terms.size(); ++t) {
        out << "(" << next << ")=LLM(\"" << detail::op_name(terms[t].sign) << "(" << acc << ", "
            << terms[t].ref << ")" << detail::arithmetic_tail() << "\n";
        acc = "{(" + std::to_string(next) + ")}";
        ++next;
      }
      break;
    }
    case TaskName::LargeDigit: {
      int n = inst.size;
      out << "(0)=LLM(\"Split \"{(input)}\" by + and output in string format in an array.\")\n";
      for (int k = 0; k < n; ++k) {
        int pos = n - 1 - k;
        int sum_index = 2 * k + 1;
        out << "(" << sum_index << ")=LLM(\"Calculate ";
        if (k > 0) out << "{(" << (2 * k) << ")}+";
        out << "{(0)}[0][" << pos << "]+{(0)}[1][" << pos << "]. Only output result.\")\n";
        out << "(" << (sum_index + 1) << ")=LLM(\"Calculate {(" << sum_index
            << ")} divide 10, Only output integer.\")\n";
      }
      out << "(" << (2 * n + 1) << ")=LLM(\"Convert into an integer: {(" << (2 * n) << ")}";
      for (int k = n - 1; k >= 0; --k) out << "{(" << (2 * k + 1) << ")}[-1]";
      out << "\")\n";
      break;
    }
    case TaskName::Sorting: {
      int n = inst.size;
      out << "(0)=LLM(\"Initialize an array of size 10 to zero.\")\n";
      for (int k = 1; k <= n; ++k)
        out << "(" << k << ")=LLM(\"Increment the count at index {(input)}[" << (k - 1)
            << "] in {(" << (k - 1) << ")} (index start from 0). Only output updated array.\")\n";
      out << "(" << (n + 1) << ")=LLM(\"Convert {(" << n << ")} in English. Output an array.\")\n";
      out << "(" << (n + 2) << ")=LLM(\"The array should contain";
      for (int d = 0; d <= 4; ++d)
        out << " {(" << (n + 1) << ")}[" << d << "] " << d << "s" << (d < 4 ? "," : "");
      out << ". Output in array format.\")\n";
      out << "(" << (n + 3) << ")=LLM(\"The array should contain";
      for (int d = 5; d <= 9; ++d)
        out << " {(" << (n + 1) << ")}[" << d << "] " << d << "s" << (d < 9 ? "," : "");
      out << ". Output in array format.\")\n";
      out << "(" << (n + 4) << ")=LLM(\"Combine {(" << (n + 2) << ")} and {(" << (n + 3)
          << ")} in ascending order. Only output array.\")\n";
      break;
    }
    case TaskName::SetIntersection: {
      int n = inst.size;
      for (int k = 0; k < n; ++k)
        out << "(" << k << ")=LLM(\"Find the intersection for [{(Set1)}[" << k
            << "]] and {(Set2)}. Output [] if mutually exclusive.\")\n";
      out << "(" << n << ")=LLM(\"Combine ";
      for (int k = 0; k < n; ++k) out << "{(" << k << ")}" << (k + 1 < n ? ", " : "");
      out << " in one array.\")\n";
      break;
    }
    case TaskName::Yelp: {
      int n = static_cast<int>(inst.reviews.size());
      for (int k = 0; k < n; ++k)
        out << "(" << k << ")=LLM(\"Check the following review is Positive or Negative: "
            << "{(input)}[" << k << "].\")\n";
      out << "(" << n << ")=LLM(\"[";
      for (int k = 0; k < n; ++k) out << "{(" << k << ")}" << (k + 1 < n ? ", " : "");
      out << "], output the number of Positive.\")\n";
      break;
    }
    case TaskName::Keyword: {
      int n = static_cast<int>(inst.sentences.size());
      out << "(0)=LLM(\"Split the following article into sentences: '{(input)}'. "
             "Output an array.\")\n";
      for (int k = 1; k <= n; ++k)
        out << "(" << k << ")=LLM(\"Extract all country names (no continents) in the order of "
               "their appearance from the following sentence (repeated is allowed): \"{(0)}["
            << (k - 1) << "]\"  Output [] if not exist any country.\")\n";
      out << "(" << (n + 1) << ")=LLM(\"Combine ";
      for (int k = 1; k <= n; ++k) out << "{(" << k << ")}" << (k < n ? ", " : "");
      out << " in one array. Repeated is allowed.\")\n";
      break;
    }
  }
  return out.str();
}

// The natural-language plan the extraction stage would produce, used by the
// offline plan backend in place of a live model.
inline std::string fixture_plan(TaskName task) {
  switch (task) {
    case TaskName::Arithmetic:
      return "Step0: Split the numbers in the input without the operators.\n"
             "Step1: Carry out every multiplication and division between neighboring numbers, "
             "two numbers at a time.\n"
             "Step2: Add and subtract the remaining results from left to right, two at a time.\n"
             "Step3: The last result is the final answer.";
    case TaskName::LargeDigit:
      return "Step0: Split the input by the plus sign into two digit strings.\n"
             "Step1: Add the least significant digits of both numbers.\n"
             "Step2: Divide the sum by ten to obtain the carry.\n"
             "Step3: Repeat the addition with the carry for every remaining digit position.\n"
             "Step4: Concatenate the final carry and the units digit of every sum.";
    case TaskName::Sorting:
      return "Step0: Initialize an array of ten zero counts.\n"
             "Step1: Increment the count at the index given by each input element, one element "
             "at a time.\n"
             "Step2: Convert the final counts to English words.\n"
             "Step3: Expand the counts back into digits in ascending order.\n"
             "Step4: Combine the expanded halves into one sorted array.";
    case TaskName::SetIntersection:
      return "Step0: Check whether the first element of Set1 appears in Set2.\n"
             "Step1: Repeat the check for every element of Set1, one at a time.\n"
             "Step2: Combine all non-empty results into one array.";
    case TaskName::Yelp:
      return "Step0: Check whether the first review is positive or negative.\n"
             "Step1: Repeat the check for every review, one at a time.\n"
             "Step2: Count how many results are positive.";
    case TaskName::Keyword:
      return "Step0: Split the article into sentences.\n"
             "Step1: Extract the country names from each sentence, one sentence at a time.\n"
             "Step2: Combine all extracted names into one array in order.";
  }
  return "";
}

inline nlohmann::json to_json(const TaskInstance& inst) {
  nlohmann::json payload;
  switch (inst.task) {
    case TaskName::Sorting: payload = {{"numbers", inst.numbers}}; break;
    case TaskName::SetIntersection:
      payload = {{"set1", inst.set1}, {"set2", inst.set2}};
      break;
    case TaskName::Arithmetic:
      payload = {{"expression", render_expression(inst)}};
      break;
    case TaskName::LargeDigit:
      payload = {{"a", inst.addend_a}, {"b", inst.addend_b}};
      break;
    case TaskName::Yelp: {
      nlohmann::json reviews = nlohmann::json::array();
      for (const auto& [text, positive] : inst.reviews)
        reviews.push_back({{"text", text}, {"label", positive ? "positive" : "negative"}});
      payload = {{"reviews", std::move(reviews)}};
      break;
    }
    case TaskName::Keyword:
      payload = {{"sentences", inst.sentences}, {"mentions", inst.mentions}};
      break;
  }
  return {{"task", to_string(inst.task)},
          {"size", inst.size},
          {"seed", inst.seed},
          {"payload", std::move(payload)},
          {"ground_truth", ground_truth(inst)}};
}

// User-supplied review corpus: JSON Lines of {text, label}.
inline std::vector<std::pair<std::string, bool>> load_review_corpus(std::istream& in) {
  std::vector<std::pair<std::string, bool>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (knot::detail::trim_copy(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    const auto& label = j.at("label");
    bool positive = label.is_boolean()
                        ? label.get<bool>()
                        : label.is_number()
                              ? label.get<double>() >= 4
                              : label.get<std::string>() == "positive" ||
                                    label.get<std::string>() == "5";
    corpus.emplace_back(j.at("text").get<std::string>(), positive);
  }
  return corpus;
}

}  // namespace knot::tasks

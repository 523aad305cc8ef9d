#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "knot/backends.hpp"
#include "knot/lwt.hpp"

namespace knot {

using Bindings = std::map<std::string, std::string>;

// Outputs addressed by instruction index; gaps stay disengaged.
using OutputList = std::vector<std::optional<std::string>>;

struct IndexOutOfRange : std::runtime_error {
  std::size_t step;
  int index;
  std::size_t length;
  IndexOutOfRange(std::size_t step_, int index_, std::size_t length_)
      : std::runtime_error("index " + std::to_string(index_) + " out of range for length " +
                           std::to_string(length_) + " at path step " + std::to_string(step_)),
        step(step_), index(index_), length(length_) {}
};

struct MissingBinding : std::runtime_error {
  explicit MissingBinding(const std::string& name)
      : std::runtime_error("no binding for named input '" + name + "'") {}
};

struct MissingOutput : std::runtime_error {
  explicit MissingOutput(int index)
      : std::runtime_error("no output recorded for instruction (" + std::to_string(index) + ")") {}
};

// Splits a backend response into list elements. Bracketed strings split at
// top-level commas (nested brackets and quotes respected, one quote layer
// stripped); bare comma-joined strings split at commas; anything else is a
// single-element list. Total: never fails.
inline std::vector<std::string> parse_list(std::string_view text) {
  std::string trimmed = detail::trim_copy(text);
  auto strip_quotes = [](std::string s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
      return s.substr(1, s.size() - 2);
    return s;
  };
  auto split_top_level = [&](std::string_view inner) {
    std::vector<std::string> out;
    std::string current;
    int depth = 0;
    char quote = 0;
    for (char c : inner) {
      if (quote) {
        if (c == quote) quote = 0;
        current += c;
      } else if (c == '\'' || c == '"') {
        quote = c;
        current += c;
      } else if (c == '[' || c == '(' || c == '{') {
        ++depth;
        current += c;
      } else if (c == ']' || c == ')' || c == '}') {
        --depth;
        current += c;
      } else if (c == ',' && depth == 0) {
        out.push_back(strip_quotes(detail::trim_copy(current)));
        current.clear();
      } else {
        current += c;
      }
    }
    std::string last = detail::trim_copy(current);
    if (!(out.empty() && last.empty())) out.push_back(strip_quotes(last));
    return out;
  };

  if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']')
    return split_top_level(std::string_view(trimmed).substr(1, trimmed.size() - 2));
  if (trimmed.find(',') != std::string::npos) return split_top_level(trimmed);
  return {trimmed};
}

namespace detail {

// Decodes a UTF-8 string into codepoint substrings; malformed bytes pass
// through as single-byte units.
inline std::vector<std::string> utf8_scalars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    if (i + len > s.size()) len = 1;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

inline bool looks_like_list(std::string_view text, const std::vector<std::string>& elements) {
  std::string trimmed = trim_copy(text);
  if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') return true;
  return elements.size() > 1;
}

}  // namespace detail

// Applies a chain of python-style indices. Each step indexes into the list
// form when the current value looks like a list, otherwise into its Unicode
// scalar sequence. Negative indices count from the end.
inline std::string index_value(std::string_view value, const std::vector<int>& path) {
  std::string current = detail::trim_copy(value);
  for (std::size_t step = 0; step < path.size(); ++step) {
    std::vector<std::string> elements = parse_list(current);
    if (!detail::looks_like_list(current, elements))
      elements = detail::utf8_scalars(detail::trim_copy(current));
    int idx = path[step];
    std::int64_t resolved = idx < 0 ? static_cast<std::int64_t>(elements.size()) + idx : idx;
    if (resolved < 0 || resolved >= static_cast<std::int64_t>(elements.size()))
      throw IndexOutOfRange(step, idx, elements.size());
    current = elements[static_cast<std::size_t>(resolved)];
  }
  return current;
}

// Renders one instruction against the output list L and the named bindings.
// Referenced values are whitespace-trimmed at substitution time only.
inline std::string render_instruction(const lwt::LwtInstruction& instr, const OutputList& outputs,
                                      const Bindings& bindings) {
  std::string out;
  for (const auto& seg : instr.segments) {
    if (auto* lit = std::get_if<std::string>(&seg)) {
      out += *lit;
      continue;
    }
    const auto& ph = std::get<lwt::Placeholder>(seg);
    std::string source;
    if (ph.numbered) {
      if (ph.index < 0 || static_cast<std::size_t>(ph.index) >= outputs.size() ||
          !outputs[ph.index])
        throw MissingOutput(ph.index);
      source = *outputs[ph.index];
    } else {
      auto it = bindings.find(ph.name);
      if (it == bindings.end()) throw MissingBinding(ph.name);
      source = it->second;
    }
    out += ph.index_path.empty() ? detail::trim_copy(source) : index_value(source, ph.index_path);
  }
  return out;
}

struct StepRecord {
  int instruction_index = 0;
  std::string prompt;
  std::string response;
  std::chrono::steady_clock::time_point started;
  std::chrono::steady_clock::time_point finished;
  TokenUsage usage;

  double latency_ms() const {
    return std::chrono::duration<double, std::milli>(finished - started).count();
  }
};

struct ExecutionTrace {
  std::vector<StepRecord> steps;       // completion order
  std::vector<std::string> outputs;    // the list L, in instruction order
  std::string final_answer;            // output of the last instruction

  TokenUsage total_usage() const {
    TokenUsage total;
    for (const auto& s : steps) total += s.usage;
    return total;
  }
};

// A failed run carries the partial trace for inspection.
struct ExecutionError : std::runtime_error {
  ExecutionTrace partial;
  int instruction_index;
  ExecutionError(const std::string& what, ExecutionTrace trace, int index)
      : std::runtime_error(what), partial(std::move(trace)), instruction_index(index) {}
};

struct ExecuteOptions {
  // When set, a failing step records the error text as its output and
  // execution continues instead of aborting.
  bool record_errors = false;
};

namespace detail {

inline OutputList make_output_slots(const lwt::LwtScript& script) {
  int max_index = 0;
  for (const auto& ins : script.instructions) max_index = std::max(max_index, ins.index);
  return OutputList(static_cast<std::size_t>(max_index) + 1);
}

}  // namespace detail

// Sequential execution: render, infer, append, in instruction order.
inline ExecutionTrace execute_script(const lwt::LwtScript& script, const Bindings& bindings,
                                     Backend& backend, const ExecuteOptions& opts = {}) {
  ExecutionTrace trace;
  OutputList slots = detail::make_output_slots(script);
  for (const auto& ins : script.instructions) {
    StepRecord step;
    step.instruction_index = ins.index;
    step.started = std::chrono::steady_clock::now();
    try {
      step.prompt = render_instruction(ins, slots, bindings);
      InferResult result = backend.infer(step.prompt);
      step.response = std::move(result.response);
      step.usage = result.usage;
    } catch (const std::exception& e) {
      if (!opts.record_errors) {
        step.finished = std::chrono::steady_clock::now();
        throw ExecutionError(std::string("instruction (") + std::to_string(ins.index) +
                                 ") failed: " + e.what(),
                             std::move(trace), ins.index);
      }
      step.response = std::string("<error: ") + e.what() + ">";
    }
    step.finished = std::chrono::steady_clock::now();
    slots[ins.index] = step.response;
    trace.outputs.push_back(step.response);
    trace.steps.push_back(std::move(step));
  }
  trace.final_answer = trace.outputs.empty() ? "" : trace.outputs.back();
  return trace;
}

// Dependency-parallel execution: an instruction becomes ready once all the
// instructions it references have completed; at most max_in_flight run at
// once. Steps are recorded in completion order, outputs in instruction order.
inline ExecutionTrace execute_parallel(const lwt::LwtScript& script, const Bindings& bindings,
                                       Backend& backend, unsigned max_in_flight,
                                       const ExecuteOptions& opts = {}) {
  if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be positive");
  const std::size_t n = script.instructions.size();

  std::map<int, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) position[script.instructions[i].index] = i;

  std::vector<std::vector<std::size_t>> dependents(n);
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::size_t> deps;
    for (const auto* ph : script.instructions[i].refs()) {
      if (!ph->numbered) continue;
      auto it = position.find(ph->index);
      if (it != position.end() && it->second != i) deps.insert(it->second);
    }
    pending[i] = deps.size();
    for (std::size_t d : deps) dependents[d].push_back(i);
  }

  std::mutex mutex;
  std::condition_variable ready_cv;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push_back(i);

  OutputList slots = detail::make_output_slots(script);
  ExecutionTrace trace;
  trace.outputs.assign(n, "");
  std::size_t completed = 0;
  bool failed = false;
  std::string failure;
  int failure_index = -1;

  auto worker = [&] {
    std::unique_lock lock(mutex);
    while (true) {
      ready_cv.wait(lock, [&] { return !ready.empty() || completed == n || failed; });
      if (failed || (ready.empty() && completed == n)) return;
      if (ready.empty()) continue;
      // Lowest pending position first: serial runs match instruction order.
      auto it = std::min_element(ready.begin(), ready.end());
      std::size_t i = *it;
      ready.erase(it);
      const auto& ins = script.instructions[i];

      StepRecord step;
      step.instruction_index = ins.index;
      std::string response;
      bool step_failed = false;
      lock.unlock();
      step.started = std::chrono::steady_clock::now();
      try {
        {
          std::unique_lock render_lock(mutex);
          step.prompt = render_instruction(ins, slots, bindings);
        }
        InferResult result = backend.infer(step.prompt);
        response = std::move(result.response);
        step.usage = result.usage;
      } catch (const std::exception& e) {
        if (opts.record_errors) {
          response = std::string("<error: ") + e.what() + ">";
        } else {
          step_failed = true;
          response = std::string("instruction (") + std::to_string(ins.index) +
                     ") failed: " + e.what();
        }
      }
      step.finished = std::chrono::steady_clock::now();
      lock.lock();
      if (step_failed) {
        if (!failed) {
          failed = true;
          failure = response;
          failure_index = ins.index;
        }
        ready_cv.notify_all();
        return;
      }
      step.response = response;
      slots[ins.index] = response;
      trace.outputs[i] = response;
      trace.steps.push_back(std::move(step));
      ++completed;
      for (std::size_t dep : dependents[i]) {
        if (--pending[dep] == 0) ready.push_back(dep);
      }
      ready_cv.notify_all();
    }
  };

  const unsigned worker_count = std::min<unsigned>(max_in_flight, n == 0 ? 1 : static_cast<unsigned>(n));
  std::vector<std::thread> threads;
  threads.reserve(worker_count);
  for (unsigned t = 0; t < worker_count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (failed) {
    ExecutionTrace partial = std::move(trace);
    partial.outputs.clear();
    for (const auto& s : partial.steps) partial.outputs.push_back(s.response);
    throw ExecutionError(failure, std::move(partial), failure_index);
  }
  trace.final_answer = trace.outputs.empty() ? "" : trace.outputs.back();
  return trace;
}

// JSON Lines rendering: one record per step plus a final summary record.
inline std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::ostringstream out;
  for (const auto& step : trace.steps) {
    out << nlohmann::json{{"index", step.instruction_index},
                          {"prompt", step.prompt},
                          {"response", step.response},
                          {"latency_ms", step.latency_ms()},
                          {"usage",
                           {{"prompt_tokens", step.usage.prompt_tokens},
                            {"completion_tokens", step.usage.completion_tokens},
                            {"estimated", step.usage.estimated}}}}
        << '\n';
  }
  TokenUsage total = trace.total_usage();
  out << nlohmann::json{{"final_answer", trace.final_answer},
                        {"steps", trace.steps.size()},
                        {"usage",
                         {{"prompt_tokens", total.prompt_tokens},
                          {"completion_tokens", total.completion_tokens},
                          {"estimated", total.estimated}}}}
      << '\n';
  return out.str();
}

}  // namespace knot

#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "knot/backends.hpp"
#include "knot/pipeline.hpp"
#include "knot/runtime.hpp"

namespace knot::metrics {

struct SampleRecord {
  std::uint64_t seed = 0;
  std::string raw_answer;
  std::string normalized_answer;  // empty when unparseable
  std::string ground_truth;
  bool correct = false;
  bool unparseable = false;
  std::string error;  // backend/runtime failure, when any
  TokenUsage usage;
  double latency_ms = 0.0;
};

struct EmptyRun : std::runtime_error {
  EmptyRun() : std::runtime_error("bench run produced zero samples") {}
};

struct BenchResult {
  std::string task;
  int size = 0;
  std::string scheme;
  std::size_t n_samples = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  TokenUsage usage;
  std::vector<SampleRecord> samples;
};

// Exact-match aggregation; unparseable answers count as incorrect. The merge
// is order-insensitive: samples are sorted by seed before reporting.
inline BenchResult score(std::string task, int size, std::string scheme,
                         std::vector<SampleRecord> samples) {
  if (samples.empty()) throw EmptyRun();
  std::sort(samples.begin(), samples.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.seed < b.seed; });
  BenchResult result;
  result.task = std::move(task);
  result.size = size;
  result.scheme = std::move(scheme);
  result.n_samples = samples.size();
  for (const auto& s : samples) {
    if (s.correct) ++result.n_correct;
    result.usage += s.usage;
  }
  result.accuracy = static_cast<double>(result.n_correct) / static_cast<double>(result.n_samples);
  result.samples = std::move(samples);
  return result;
}

// Unicode scalar count, not bytes: identical across platforms.
inline std::size_t count_scalars(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    if (i + len > text.size()) len = 1;
    i += len;
    ++count;
  }
  return count;
}

struct CostReport {
  std::size_t constant_chars = 0;        // extraction + translation instructions
  std::size_t task_specific_chars = 0;   // context description + LWT example
  int constant_tokens_est = 0;
  int task_specific_tokens_est = 0;
  TokenUsage call_usage;                 // per-call totals from actual runs
};

// The constant-versus-task-specific labor split: C and E are the only
// task-specific bytes; everything else is reused across tasks.
inline CostReport count_prompt_cost(const pipeline::PromptParts& parts) {
  CostReport report;
  std::string constant =
      pipeline::PromptParts::extraction_instructions() +
      pipeline::PromptParts::translation_instructions();
  report.constant_chars = count_scalars(constant);
  report.task_specific_chars =
      count_scalars(parts.context_description) + count_scalars(parts.lwt_example);
  report.constant_tokens_est = estimate_tokens(constant);
  report.task_specific_tokens_est =
      estimate_tokens(parts.context_description) + estimate_tokens(parts.lwt_example);
  return report;
}

struct PriceTable {
  double input_per_1k = 0.0;   // currency per 1000 prompt tokens
  double output_per_1k = 0.0;  // currency per 1000 completion tokens
};

inline double estimate_cost(const TokenUsage& usage, const PriceTable& prices) {
  if (prices.input_per_1k < 0 || prices.output_per_1k < 0)
    throw std::invalid_argument("prices must be non-negative");
  return usage.prompt_tokens * prices.input_per_1k / 1000.0 +
         usage.completion_tokens * prices.output_per_1k / 1000.0;
}

inline nlohmann::json to_json(const CostReport& report) {
  return {{"constant_chars", report.constant_chars},
          {"task_specific_chars", report.task_specific_chars},
          {"constant_tokens_est", report.constant_tokens_est},
          {"task_specific_tokens_est", report.task_specific_tokens_est},
          {"call_usage",
           {{"prompt_tokens", report.call_usage.prompt_tokens},
            {"completion_tokens", report.call_usage.completion_tokens},
            {"estimated", report.call_usage.estimated}}}};
}

inline nlohmann::json to_json(const BenchResult& result, bool include_samples = true) {
  nlohmann::json j = {{"task", result.task},
                      {"size", result.size},
                      {"scheme", result.scheme},
                      {"n_samples", result.n_samples},
                      {"n_correct", result.n_correct},
                      {"accuracy", result.accuracy},
                      {"usage",
                       {{"prompt_tokens", result.usage.prompt_tokens},
                        {"completion_tokens", result.usage.completion_tokens},
                        {"estimated", result.usage.estimated}}}};
  if (include_samples) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : result.samples) {
      samples.push_back({{"seed", s.seed},
                         {"answer", s.raw_answer},
                         {"normalized", s.normalized_answer},
                         {"ground_truth", s.ground_truth},
                         {"correct", s.correct},
                         {"unparseable", s.unparseable},
                         {"error", s.error},
                         {"latency_ms", s.latency_ms}});
    }
    j["samples"] = std::move(samples);
  }
  return j;
}

// Aligned text table, one row per (task, size, scheme).
inline std::string format_table(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "task" << std::setw(6) << "size" << std::setw(12)
      << "scheme" << std::setw(10) << "samples" << std::setw(10) << "correct"
      << "accuracy\n";
  for (const auto& r : results) {
    out << std::left << std::setw(18) << r.task << std::setw(6) << r.size << std::setw(12)
        << r.scheme << std::setw(10) << r.n_samples << std::setw(10) << r.n_correct
        << std::fixed << std::setprecision(2) << r.accuracy * 100.0 << "%\n";
  }
  return out.str();
}

inline std::string format_csv(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << "task,size,scheme,n_samples,n_correct,accuracy\n";
  for (const auto& r : results) {
    out << r.task << ',' << r.size << ',' << r.scheme << ',' << r.n_samples << ','
        << r.n_correct << ',' << r.accuracy << '\n';
  }
  return out.str();
}

}  // namespace knot::metrics

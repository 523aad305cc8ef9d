#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "knot/backends.hpp"
#include "knot/lwt.hpp"
#include "knot/runtime.hpp"
#include "knot/tasks.hpp"

namespace knot::pipeline {

// Constant prompt fragments, shared by every task. The elementary and
// restriction commands are kept separable so each can be ablated on its own.
namespace fragments {

inline constexpr std::string_view kExtractionHeader = "Given the following question:\n";

inline constexpr std::string_view kExtractionFraming =
    "The Input section is the input query.\n"
    "The Context section is the goal we want to achieve.\n";

inline constexpr std::string_view kElementaryCommands =
    "Please use your knowledge to create a solution by step-by-step manner without any "
    "numbers.\n"
    "Every step need to be as easy as possible.\n"
    "Use Step0, Step1, Step2 to represent result.\n";

inline constexpr std::string_view kRestrictionCommands =
    "Don't use for loop to reduce step.\n"
    "Don't directly use any element in the input.\n";

inline constexpr std::string_view kTranslationFraming =
    "The Input section is the input query. The Context section is the goal we want to "
    "achieve.\n";

inline constexpr std::string_view kTranslationRules =
    "You have to follow the rules to create a script.\n"
    "This script should be numbered and contains several instruction to be called "
    "line-by-line in a sequential order.\n"
    "Use (number) to represent each line.\n"
    "The line numbering starts from 0.\n"
    "You can use LLM Inference: use LLM(\"Your Instruction\") to find the answer.\n"
    "Use {(index)} to represent the variable you want to replace with previous result.\n"
    "Use {(input)}, {(Set1)}, ... to represent input, not allow to directly use numbers.\n"
    "Use python indexing to get the element in the list (E.g. {(0)}[0], {(0)}[1]).\n"
    "Do not directly use numbers.\n";

inline constexpr std::string_view kExampleHeader = "Here is one example.\n";

}  // namespace fragments

struct PromptParts {
  std::string context_description;  // C, task-specific
  std::string lwt_example;          // E, task-specific

  // Constant prompt text, identical for every task.
  static std::string extraction_instructions() {
    std::string out;
    out += fragments::kExtractionHeader;
    out += fragments::kExtractionFraming;
    out += fragments::kElementaryCommands;
    out += fragments::kRestrictionCommands;
    return out;
  }

  static std::string translation_instructions() {
    std::string out;
    out += fragments::kTranslationFraming;
    out += fragments::kTranslationRules;
    out += fragments::kExampleHeader;
    return out;
  }
};

// Components 1-6 of the two prompts; all-true is the full scheme.
struct AblationConfig {
  bool include_context_in_extraction = true;    // 1
  bool include_elementary_commands = true;      // 2
  bool include_restriction_commands = true;     // 3
  bool include_context_in_translation = true;   // 4
  bool include_translation_instructions = true; // 5
  bool include_lwt_example = true;              // 6

  bool full() const {
    return include_context_in_extraction && include_elementary_commands &&
           include_restriction_commands && include_context_in_translation &&
           include_translation_instructions && include_lwt_example;
  }

  std::string mask() const {
    std::string m;
    m += include_context_in_extraction ? '1' : '0';
    m += include_elementary_commands ? '1' : '0';
    m += include_restriction_commands ? '1' : '0';
    m += include_context_in_translation ? '1' : '0';
    m += include_translation_instructions ? '1' : '0';
    m += include_lwt_example ? '1' : '0';
    return m;
  }
};

struct SolutionPlan {
  std::string text;
};

inline std::string build_extraction_prompt(const std::string& query, const PromptParts& parts,
                                           const AblationConfig& abl = {}) {
  std::string out;
  out += fragments::kExtractionHeader;
  out += "Input: " + query + "\n";
  if (abl.include_context_in_extraction)
    out += "Context: " + parts.context_description + "\n";
  out += fragments::kExtractionFraming;
  if (abl.include_elementary_commands) out += fragments::kElementaryCommands;
  if (abl.include_restriction_commands) out += fragments::kRestrictionCommands;
  return out;
}

inline std::string build_translation_prompt(const SolutionPlan& plan, const std::string& query,
                                            const PromptParts& parts,
                                            const AblationConfig& abl = {}) {
  std::string out;
  out += "Based on your expert knowledge\n" + plan.text +
         "\nand the above example, create a script to solve the following question:\n";
  out += "Input: " + query + "\n";
  if (abl.include_context_in_translation)
    out += "Context: " + parts.context_description + "\n";
  out += fragments::kTranslationFraming;
  if (abl.include_translation_instructions) out += fragments::kTranslationRules;
  if (abl.include_lwt_example) {
    out += fragments::kExampleHeader;
    out += parts.lwt_example;
    if (!parts.lwt_example.empty() && parts.lwt_example.back() != '\n') out += '\n';
  }
  return out;
}

inline SolutionPlan extract_plan(Backend& backend, const std::string& prompt) {
  return {backend.infer(prompt).response};
}

struct KnotResult {
  SolutionPlan plan;
  std::string script_text;   // raw stage-2 output
  lwt::LwtScript script;
  lwt::ValidationReport validation;
  ExecutionTrace trace;
  std::string answer;
  TokenUsage plan_usage;     // stages 1-2
};

struct PipelineError : std::runtime_error {
  std::string raw_script_text;  // stage-2 output kept for inspection
  PipelineError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_script_text(std::move(raw)) {}
};

// The full three-stage scheme. plan_backend serves stages 1-2 (script
// generation), exec_backend serves stage 3; the two may differ.
inline KnotResult run_knot(const std::string& query, const Bindings& bindings,
                           const PromptParts& parts, const AblationConfig& abl,
                           Backend& plan_backend, Backend& exec_backend,
                           unsigned parallelism = 1) {
  KnotResult result;

  std::string extraction = build_extraction_prompt(query, parts, abl);
  InferResult stage1 = plan_backend.infer(extraction);
  result.plan = {stage1.response};
  result.plan_usage += stage1.usage;

  std::string translation = build_translation_prompt(result.plan, query, parts, abl);
  InferResult stage2 = plan_backend.infer(translation);
  result.script_text = stage2.response;
  result.plan_usage += stage2.usage;

  try {
    result.script = lwt::parse_script(result.script_text);
  } catch (const lwt::ParseError& e) {
    throw PipelineError(std::string("stage 2 produced no usable script: ") + e.what(),
                        result.script_text);
  }
  std::set<std::string> names;
  for (const auto& [name, value] : bindings) names.insert(name);
  result.validation = lwt::validate_script(result.script, names);
  if (!result.validation.ok()) {
    std::string msg = "stage 2 script failed validation:";
    for (const auto& err : result.validation.errors)
      msg += " [" + lwt::to_string(err.kind) + "] " + err.message + ";";
    throw PipelineError(msg, result.script_text);
  }

  result.trace = parallelism > 1
                     ? execute_parallel(result.script, bindings, exec_backend, parallelism)
                     : execute_script(result.script, bindings, exec_backend);
  result.answer = result.trace.final_answer;
  return result;
}

// Offline stand-in for the script-generation model: answers the extraction
// prompt with a canned plan and the translation prompt with a fixture script.
class FixturePlannerBackend : public Backend {
 public:
  FixturePlannerBackend(std::string plan, std::string script)
      : plan_(std::move(plan)), script_(std::move(script)) {}

  static FixturePlannerBackend for_instance(const tasks::TaskInstance& inst) {
    return {tasks::fixture_plan(inst.task), tasks::fixture_script(inst)};
  }

  InferResult infer(const std::string& prompt) override {
    const std::string& response =
        prompt.find("create a script") != std::string::npos ? script_ : plan_;
    return {response, {estimate_tokens(prompt), estimate_tokens(response), true}};
  }

 private:
  std::string plan_;
  std::string script_;
};

enum class BaselineKind { ZeroShot, FewShot, ZeroCoT, CoT };

inline std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::ZeroShot: return "zero_shot";
    case BaselineKind::FewShot: return "few_shot";
    case BaselineKind::ZeroCoT: return "zero_cot";
    case BaselineKind::CoT: return "cot";
  }
  return "?";
}

struct BaselinePrompts {
  std::string few_shot_example;  // plain input/output pairs
  std::string cot_example;       // worked reasoning ending in the final answer
};

inline std::string build_baseline_prompt(BaselineKind kind, const std::string& query,
                                         const std::string& context,
                                         const BaselinePrompts& prompts) {
  std::string out = context.empty() ? "" : context + "\n";
  switch (kind) {
    case BaselineKind::ZeroShot:
      out += "Input: " + query + "\nAnswer:";
      break;
    case BaselineKind::FewShot:
      if (prompts.few_shot_example.empty())
        throw std::invalid_argument("few-shot baseline requires an example");
      out += prompts.few_shot_example + "\nInput: " + query + "\nAnswer:";
      break;
    case BaselineKind::ZeroCoT:
      out += "Input: " + query + "\nLet's think step by step";
      break;
    case BaselineKind::CoT:
      if (prompts.cot_example.empty())
        throw std::invalid_argument("CoT baseline requires an example");
      out += prompts.cot_example + "\nInput: " + query + "\nAnswer:";
      break;
  }
  return out;
}

inline std::string run_baseline(BaselineKind kind, const std::string& query,
                                const std::string& context, const BaselinePrompts& prompts,
                                Backend& backend) {
  return backend.infer(build_baseline_prompt(kind, query, context, prompts)).response;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace detail

// Loads the task-specific bundle: <dir>/<task>/context.txt and example.lwt.
inline PromptParts load_prompt_parts(const std::filesystem::path& tasks_dir,
                                     tasks::TaskName task) {
  auto dir = tasks_dir / tasks::to_string(task);
  PromptParts parts;
  parts.context_description = knot::detail::trim_copy(detail::read_file(dir / "context.txt"));
  parts.lwt_example = detail::read_file(dir / "example.lwt");
  return parts;
}

inline BaselinePrompts load_baseline_prompts(const std::filesystem::path& tasks_dir,
                                             tasks::TaskName task) {
  auto dir = tasks_dir / tasks::to_string(task);
  BaselinePrompts prompts;
  auto few_shot = dir / "few_shot.txt";
  auto cot = dir / "cot_example.txt";
  if (std::filesystem::exists(few_shot))
    prompts.few_shot_example = detail::read_file(few_shot);
  if (std::filesystem::exists(cot)) prompts.cot_example = detail::read_file(cot);
  return prompts;
}

}  // namespace knot::pipeline

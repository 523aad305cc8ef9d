#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "knot/oracle.hpp"
#include "knot/pipeline.hpp"
#include "knot/tasks.hpp"

using namespace knot;
using namespace knot::pipeline;
namespace fs = std::filesystem;

namespace {

const fs::path kTasksDir = fs::path(KNOT_ASSET_DIR) / "tasks";

bool contains(const std::string& haystack, std::string_view needle) {
  return haystack.find(needle) != std::string::npos;
}

AblationConfig with_flag_off(int flag) {
  AblationConfig abl;
  if (flag == 0) abl.include_context_in_extraction = false;
  if (flag == 1) abl.include_elementary_commands = false;
  if (flag == 2) abl.include_restriction_commands = false;
  if (flag == 3) abl.include_context_in_translation = false;
  if (flag == 4) abl.include_translation_instructions = false;
  if (flag == 5) abl.include_lwt_example = false;
  return abl;
}

}  // namespace

TEST_CASE("extraction prompt carries the query, context, and command blocks") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Sorting);
  std::string prompt = build_extraction_prompt("[2, 1, 1]", parts, {});
  CHECK(contains(prompt, "Given the following question:"));
  CHECK(contains(prompt, "Input: [2, 1, 1]"));
  CHECK(contains(prompt, "Context: " + parts.context_description));
  CHECK(contains(prompt, "You can use counting sort."));
  CHECK(contains(prompt, "Use Step0, Step1, Step2 to represent result."));
  CHECK(contains(prompt, "Don't use for loop to reduce step."));
  CHECK(contains(prompt, "Don't directly use any element in the input."));
  // Deterministic: same inputs, same bytes.
  CHECK(build_extraction_prompt("[2, 1, 1]", parts, {}) == prompt);
}

TEST_CASE("translation prompt embeds the plan, rules, and worked example") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Arithmetic);
  SolutionPlan plan{"Step0: split. Step1: multiply."};
  std::string prompt = build_translation_prompt(plan, "1+2*3", parts, {});
  CHECK(contains(prompt, "Based on your expert knowledge"));
  CHECK(contains(prompt, plan.text));
  CHECK(contains(prompt, "create a script"));
  CHECK(contains(prompt, "Input: 1+2*3"));
  CHECK(contains(prompt, "Use (number) to represent each line."));
  CHECK(contains(prompt, "The line numbering starts from 0."));
  CHECK(contains(prompt, "Use python indexing to get the element in the list"));
  CHECK(contains(prompt, "Here is one example."));
  CHECK(contains(prompt, parts.lwt_example));
}

TEST_CASE("each ablation flag removes exactly its own block") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Sorting);
  SolutionPlan plan{"Step0: count digits."};
  const std::string query = "[3, 1]";
  std::string full_e = build_extraction_prompt(query, parts, {});
  std::string full_t = build_translation_prompt(plan, query, parts, {});

  struct Expectation {
    int flag;
    bool in_extraction;
    std::string_view marker;
  };
  const Expectation table[] = {
      {0, true, "Context: "},
      {1, true, "Use Step0, Step1, Step2 to represent result."},
      {2, true, "Don't use for loop to reduce step."},
      {3, false, "Context: "},
      {4, false, "Use (number) to represent each line."},
      {5, false, "Here is one example."},
  };
  for (const auto& row : table) {
    CAPTURE(row.flag);
    auto abl = with_flag_off(row.flag);
    std::string e = build_extraction_prompt(query, parts, abl);
    std::string t = build_translation_prompt(plan, query, parts, abl);
    if (row.in_extraction) {
      CHECK(contains(full_e, row.marker));
      CHECK_FALSE(contains(e, row.marker));
      CHECK(t == full_t);  // the other prompt is untouched
    } else {
      CHECK(contains(full_t, row.marker));
      CHECK_FALSE(contains(t, row.marker));
      CHECK(e == full_e);
    }
    CHECK_FALSE(abl.full());
    CHECK(abl.mask().size() == 6);
    CHECK(abl.mask()[row.flag] == '0');
  }
  CHECK(AblationConfig{}.full());
  CHECK(AblationConfig{}.mask() == "111111");
}

TEST_CASE("instruction text outside C and E is identical across all tasks") {
  // The scheme's labor argument: only the context description and the LWT
  // example change per task. Removing those from the prompts must leave the
  // same bytes for every task.
  std::set<std::string> extraction_residue;
  std::set<std::string> translation_residue;
  for (auto task : tasks::all_tasks()) {
    auto parts = load_prompt_parts(kTasksDir, task);
    SolutionPlan plan{"PLAN"};
    std::string e = build_extraction_prompt("QUERY", parts, {});
    std::string t = build_translation_prompt(plan, "QUERY", parts, {});
    auto erase = [](std::string s, const std::string& piece) {
      for (auto at = s.find(piece); at != std::string::npos; at = s.find(piece))
        s.erase(at, piece.size());
      return s;
    };
    extraction_residue.insert(erase(e, parts.context_description));
    translation_residue.insert(erase(erase(t, parts.context_description), parts.lwt_example));
  }
  CHECK(extraction_residue.size() == 1);
  CHECK(translation_residue.size() == 1);
}

TEST_CASE("full scheme solves a stored arithmetic query end to end") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Arithmetic);
  tasks::TaskInstance inst = tasks::generate(tasks::TaskName::Arithmetic, 8, 123);
  auto [query, bindings] = tasks::render(inst);
  auto planner = FixturePlannerBackend::for_instance(inst);
  OracleBackend oracle;
  auto result = run_knot(query, bindings, parts, {}, planner, oracle);
  CHECK(result.validation.ok());
  CHECK(result.trace.steps.size() == result.script.instructions.size());
  CHECK(tasks::normalize(tasks::TaskName::Arithmetic, result.answer) ==
        tasks::normalize(tasks::TaskName::Arithmetic, tasks::ground_truth(inst)));
  CHECK(result.plan_usage.prompt_tokens > 0);
}

TEST_CASE("parallel pipeline execution returns the same answer") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::SetIntersection);
  tasks::TaskInstance inst = tasks::generate(tasks::TaskName::SetIntersection, 32, 7);
  auto [query, bindings] = tasks::render(inst);
  OracleBackend oracle;
  auto planner = FixturePlannerBackend::for_instance(inst);
  auto serial = run_knot(query, bindings, parts, {}, planner, oracle, 1);
  auto planner2 = FixturePlannerBackend::for_instance(inst);
  auto parallel = run_knot(query, bindings, parts, {}, planner2, oracle, 8);
  CHECK(serial.answer == parallel.answer);
}

TEST_CASE("a planner that produces no script raises a pipeline error") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Arithmetic);
  FixturePlannerBackend planner("some plan", "I am sorry, I cannot write scripts.");
  OracleBackend oracle;
  try {
    run_knot("1+2", {{"input", "1+2"}}, parts, {}, planner, oracle);
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    CHECK(e.raw_script_text == "I am sorry, I cannot write scripts.");
  }
}

TEST_CASE("a script with validation errors is rejected before execution") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Arithmetic);
  FixturePlannerBackend planner("plan", "(0)=LLM(\"Use {(1)} before it exists.\")\n"
                                        "(1)=LLM(\"Echo {(0)}.\")\n");
  OracleBackend oracle;
  CHECK_THROWS_AS(run_knot("q", {{"input", "q"}}, parts, {}, planner, oracle), PipelineError);
}

TEST_CASE("baseline prompt shapes") {
  auto parts = load_prompt_parts(kTasksDir, tasks::TaskName::Arithmetic);
  auto baseline = load_baseline_prompts(kTasksDir, tasks::TaskName::Arithmetic);
  REQUIRE_FALSE(baseline.few_shot_example.empty());
  REQUIRE_FALSE(baseline.cot_example.empty());

  std::string zero = build_baseline_prompt(BaselineKind::ZeroShot, "1+2",
                                           parts.context_description, baseline);
  CHECK(contains(zero, "Input: 1+2"));
  CHECK(contains(zero, parts.context_description));
  CHECK_FALSE(contains(zero, baseline.few_shot_example));

  std::string few = build_baseline_prompt(BaselineKind::FewShot, "1+2",
                                          parts.context_description, baseline);
  CHECK(contains(few, baseline.few_shot_example));

  std::string zero_cot = build_baseline_prompt(BaselineKind::ZeroCoT, "1+2",
                                               parts.context_description, baseline);
  CHECK(zero_cot.find("Let's think step by step") != std::string::npos);

  std::string cot = build_baseline_prompt(BaselineKind::CoT, "1+2",
                                          parts.context_description, baseline);
  CHECK(contains(cot, "The final answer is"));

  BaselinePrompts empty;
  CHECK_THROWS_AS(build_baseline_prompt(BaselineKind::CoT, "q", "", empty),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_baseline_prompt(BaselineKind::FewShot, "q", "", empty),
                  std::invalid_argument);
}

TEST_CASE("every task has loadable prompt parts and a validating example") {
  for (auto task : tasks::all_tasks()) {
    CAPTURE(tasks::to_string(task));
    auto parts = load_prompt_parts(kTasksDir, task);
    CHECK_FALSE(parts.context_description.empty());
    CHECK_FALSE(parts.lwt_example.empty());
    auto script = lwt::parse_script(parts.lwt_example);
    auto report = lwt::validate_script(script, script.named_inputs);
    CHECK(report.ok());
  }
}

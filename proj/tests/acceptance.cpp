// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "knot/metrics.hpp"
#include "knot/oracle.hpp"
#include "knot/pipeline.hpp"
#include "knot/runtime.hpp"
#include "knot/tasks.hpp"

using namespace knot;
namespace fs = std::filesystem;

namespace {

const fs::path kAssets = KNOT_ASSET_DIR;
int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
  if (!ok && !detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++failures;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const std::string kNumberTail =
    ". Only output number. If contains floating point, round to two decimal places.";

// ---- 1. fixture fidelity -------------------------------------------------

void check_fixture_fidelity() {
  auto started = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(kAssets))
    if (entry.path().extension() == ".lwt") files.push_back(entry.path());
  if (files.size() < 8) {
    ok = false;
    detail = "expected at least 8 stored scripts";
  }
  for (const auto& path : files) {
    try {
      std::string text = slurp(path);
      auto script = lwt::parse_script(text);
      if (script.serialize() != text) {
        ok = false;
        detail = path.filename().string() + " does not re-serialize byte-identically";
      }
      auto report = lwt::validate_script(script, script.named_inputs);
      if (!report.ok()) {
        ok = false;
        detail = path.filename().string() + " has validation errors";
      }
    } catch (const std::exception& e) {
      ok = false;
      detail = path.filename().string() + ": " + e.what();
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (secs >= 1.0) {
    ok = false;
    detail = "took " + std::to_string(secs) + " s, budget is 1 s";
  }
  report("stored scripts parse, validate cleanly, and round-trip", ok, detail);
}

// ---- 2. oracle end-to-end accuracy ----------------------------------------

void check_oracle_accuracy() {
  auto started = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  const std::pair<tasks::TaskName, int> grid[] = {
      {tasks::TaskName::Arithmetic, 8},  {tasks::TaskName::LargeDigit, 8},
      {tasks::TaskName::LargeDigit, 16}, {tasks::TaskName::LargeDigit, 32},
      {tasks::TaskName::SetIntersection, 32}, {tasks::TaskName::SetIntersection, 64},
      {tasks::TaskName::Sorting, 16},
  };
  OracleBackend backend;
  for (const auto& [task, size] : grid) {
    int correct = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto inst = tasks::generate(task, size, seed);
      try {
        auto script = lwt::parse_script(tasks::fixture_script(inst));
        auto [query, bindings] = tasks::render(inst);
        auto trace = execute_script(script, bindings, backend);
        auto answer = tasks::normalize(task, trace.final_answer);
        // Ground truth comes from independent evaluators: the big-rational
        // expression evaluator, exact big-integer addition, the standard set
        // container, and a comparison sort.
        if (answer && *answer == *tasks::normalize(task, tasks::ground_truth(inst))) ++correct;
      } catch (const std::exception&) {
      }
    }
    if (correct != 100) {
      ok = false;
      detail = tasks::to_string(task) + "-" + std::to_string(size) + ": " +
               std::to_string(correct) + "/100";
      break;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (secs >= 30.0) {
    ok = false;
    detail = "took " + std::to_string(secs) + " s, budget is 30 s";
  }
  report("offline solver scores 100/100 on every covered task size", ok, detail);
}

// ---- 3. sequential/parallel equivalence ------------------------------------

lwt::LwtScript random_script(std::mt19937& rng) {
  std::uniform_int_distribution<int> small(1, 9);
  std::uniform_int_distribution<int> count(2, 12);
  std::uniform_int_distribution<int> op_pick(0, 2);
  const char* ops[] = {"Add", "Minus", "Multiply"};
  int n = count(rng);
  std::string text;
  for (int i = 0; i < n; ++i) {
    auto operand = [&] {
      if (i > 0 && small(rng) > 3) {
        std::uniform_int_distribution<int> ref(0, i - 1);
        return "{(" + std::to_string(ref(rng)) + ")}";
      }
      return std::to_string(small(rng));
    };
    text += "(" + std::to_string(i) + ")=LLM(\"" + ops[op_pick(rng)] + "(" + operand() + ", " +
            operand() + ")" + kNumberTail + "\")\n";
  }
  return lwt::parse_script(text);
}

void check_parallel_equivalence() {
  bool ok = true;
  std::string detail;
  std::mt19937 rng(20240817);
  OracleBackend backend;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    auto script = random_script(rng);
    auto sequential = execute_script(script, {}, backend);
    for (unsigned parallelism : {1u, 2u, 8u}) {
      auto parallel = execute_parallel(script, {}, backend, parallelism);
      if (parallel.outputs != sequential.outputs ||
          parallel.final_answer != sequential.final_answer) {
        ok = false;
        detail = "trial " + std::to_string(trial) + ", parallelism " +
                 std::to_string(parallelism);
        break;
      }
    }
  }
  report("parallel execution is byte-equal to sequential on 200 random networks", ok, detail);
}

// ---- 4. indexing semantics --------------------------------------------------

void check_indexing() {
  bool ok = true;
  std::string detail;
  auto fail = [&](const std::string& why) {
    if (ok) detail = why;
    ok = false;
  };

  // Exhaustive single-step indexing over every list of length <= 5.
  for (int len = 0; len <= 5; ++len) {
    std::vector<std::string> elements;
    std::string text = "[";
    for (int i = 0; i < len; ++i) {
      if (i) text += ", ";
      text += std::to_string(10 + i);
      elements.push_back(std::to_string(10 + i));
    }
    text += "]";
    for (int idx = -7; idx <= 7; ++idx) {
      int resolved = idx < 0 ? len + idx : idx;
      bool in_range = resolved >= 0 && resolved < len;
      try {
        std::string got = index_value(text, {idx});
        if (!in_range) fail("expected IndexOutOfRange for len " + std::to_string(len));
        else if (got != elements[static_cast<std::size_t>(resolved)])
          fail("wrong element at " + std::to_string(idx));
      } catch (const IndexOutOfRange&) {
        if (in_range) fail("spurious IndexOutOfRange at " + std::to_string(idx));
      }
    }
  }

  // Chained list-then-character indexing.
  if (index_value("[12345678901234567890]", {0, 15}) != "6") fail("[0][15] chain");
  if (index_value("19", {-1}) != "9") fail("character fallback");
  if (index_value("[[1, 2], [3, 4]]", {-1, -2}) != "3") fail("nested negative chain");

  // Composition law on nested lists.
  std::string nested = "[[10, 11, 12], [20, 21], [30]]";
  for (int a = -3; a < 3; ++a) {
    for (int b = -3; b < 3; ++b) {
      std::string two_step, chained;
      bool two_threw = false, chain_threw = false;
      try {
        two_step = index_value(index_value(nested, {a}), {b});
      } catch (const IndexOutOfRange&) {
        two_threw = true;
      }
      try {
        chained = index_value(nested, {a, b});
      } catch (const IndexOutOfRange&) {
        chain_threw = true;
      }
      if (two_threw != chain_threw || (!two_threw && two_step != chained))
        fail("composition law at [" + std::to_string(a) + "][" + std::to_string(b) + "]");
    }
  }
  report("index paths follow python semantics, compose, and bound-check", ok, detail);
}

// ---- 5. oracle arithmetic agreement -----------------------------------------

void check_arithmetic_grid() {
  bool ok = true;
  std::string detail;
  const char ops[] = {'+', '-', '*', '/'};
  for (char op : ops) {
    for (int a = 0; a <= 9 && ok; ++a) {
      for (int b = 0; b <= 9 && ok; ++b) {
        if (op == '/' && b == 0) continue;
        std::string name = op == '+' ? "Add" : op == '-' ? "Minus"
                           : op == '*' ? "Multiply" : "Divide";
        std::string prompt =
            name + "(" + std::to_string(a) + ", " + std::to_string(b) + ")" + kNumberTail;
        std::string expected =
            render_decimal(elementary_op(op, BigRational(a), BigRational(b)));
        std::string got;
        try {
          got = oracle_infer(prompt);
        } catch (const std::exception& e) {
          ok = false;
          detail = prompt + " threw " + e.what();
          break;
        }
        if (got != expected) {
          ok = false;
          detail = prompt + " gave " + got + ", reference says " + expected;
        }
      }
    }
  }
  report("elementary arithmetic matches the big-rational reference on the full grid", ok,
         detail);
}

// ---- 6. cost accounting -------------------------------------------------------

std::size_t independent_scalar_count(const std::string& text) {
  // Counts bytes that are not UTF-8 continuation bytes; an independent
  // formulation of the codepoint count.
  std::size_t n = 0;
  for (unsigned char c : text)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

void check_cost_accounting() {
  bool ok = true;
  std::string detail;
  std::string constant_reference;
  for (auto task : tasks::all_tasks()) {
    auto parts = pipeline::load_prompt_parts(kAssets / "tasks", task);
    auto cost = metrics::count_prompt_cost(parts);
    std::string constant = pipeline::PromptParts::extraction_instructions() +
                           pipeline::PromptParts::translation_instructions();
    if (cost.constant_chars != independent_scalar_count(constant) ||
        cost.task_specific_chars !=
            independent_scalar_count(parts.context_description) +
                independent_scalar_count(parts.lwt_example)) {
      ok = false;
      detail = tasks::to_string(task) + " counts disagree with the byte-level oracle";
    }
    if (constant_reference.empty()) constant_reference = constant;
    else if (constant != constant_reference) {
      ok = false;
      detail = "constant prompt text differs for " + tasks::to_string(task);
    }
  }
  report("prompt cost split matches an independent counter; constant text is shared", ok,
         detail);
}

// ---- 7. ablation plumbing ------------------------------------------------------

void check_ablation_plumbing() {
  bool ok = true;
  std::string detail;
  auto parts = pipeline::load_prompt_parts(kAssets / "tasks", tasks::TaskName::Sorting);
  pipeline::SolutionPlan plan{"Step0: count."};
  const std::string query = "[2, 1]";
  std::string full_e = pipeline::build_extraction_prompt(query, parts, {});
  std::string full_t = pipeline::build_translation_prompt(plan, query, parts, {});

  struct Row {
    int flag;
    bool in_extraction;
    std::string marker;
  };
  const Row rows[] = {
      {0, true, "Context: "},
      {1, true, "Use Step0, Step1, Step2 to represent result."},
      {2, true, "Don't use for loop to reduce step."},
      {3, false, "Context: "},
      {4, false, "Use (number) to represent each line."},
      {5, false, "Here is one example."},
  };
  for (const auto& row : rows) {
    pipeline::AblationConfig abl;
    if (row.flag == 0) abl.include_context_in_extraction = false;
    if (row.flag == 1) abl.include_elementary_commands = false;
    if (row.flag == 2) abl.include_restriction_commands = false;
    if (row.flag == 3) abl.include_context_in_translation = false;
    if (row.flag == 4) abl.include_translation_instructions = false;
    if (row.flag == 5) abl.include_lwt_example = false;
    std::string e = pipeline::build_extraction_prompt(query, parts, abl);
    std::string t = pipeline::build_translation_prompt(plan, query, parts, abl);
    const std::string& changed = row.in_extraction ? e : t;
    const std::string& same = row.in_extraction ? t : e;
    const std::string& full_changed = row.in_extraction ? full_e : full_t;
    const std::string& full_same = row.in_extraction ? full_t : full_e;
    if (full_changed.find(row.marker) == std::string::npos ||
        changed.find(row.marker) != std::string::npos || same != full_same) {
      ok = false;
      detail = "flag " + std::to_string(row.flag + 1);
    }
  }
  report("each ablation flag removes exactly its own prompt fragment", ok, detail);
}

// ---- 8. record/replay closure ----------------------------------------------------

void check_record_replay() {
  bool ok = true;
  std::string detail;
  auto fixture = fs::temp_directory_path() / "knot_acceptance_fixture.jsonl";
  fs::remove(fixture);
  try {
    auto inst = tasks::generate(tasks::TaskName::Arithmetic, 8, 2718);
    auto [query, bindings] = tasks::render(inst);
    auto parts = pipeline::load_prompt_parts(kAssets / "tasks", tasks::TaskName::Arithmetic);

    ReplayBackend recorder(fixture.string(), ReplayMode::Record,
                           std::make_shared<OracleBackend>());
    auto planner = pipeline::FixturePlannerBackend::for_instance(inst);
    auto recorded = pipeline::run_knot(query, bindings, parts, {}, planner, recorder);

    ReplayBackend replayer(fixture.string(), ReplayMode::ReplayStrict);
    auto script = lwt::parse_script(tasks::fixture_script(inst));
    auto replayed = execute_script(script, bindings, replayer);
    if (replayed.outputs != recorded.trace.outputs ||
        replayed.final_answer != recorded.answer) {
      ok = false;
      detail = "replayed outputs differ from the recorded trace";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  fs::remove(fixture);
  report("a recorded run replays to a byte-identical output list", ok, detail);
}

// ---- 9. parser robustness -----------------------------------------------------------

void check_parser_fuzz() {
  bool ok = true;
  std::string detail;
  std::mt19937 rng(31337);
  const std::string alphabet =
      "(){}[]=\"'LM()ln01923-,.+*/ \t\nabcxyz\\\xC3\xA9\xF0";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 120);
  for (int trial = 0; trial < 10000; ++trial) {
    std::string text;
    int n = len(rng);
    for (int i = 0; i < n; ++i) text += alphabet[pick(rng)];
    try {
      auto script = lwt::parse_script(text);
      // Invariants of a successful parse: non-empty, strictly increasing
      // indices, and a byte-identical re-serialization.
      if (script.instructions.empty()) {
        ok = false;
        detail = "accepted an empty script at trial " + std::to_string(trial);
        break;
      }
      for (std::size_t i = 0; i + 1 < script.instructions.size(); ++i) {
        if (script.instructions[i].index >= script.instructions[i + 1].index) {
          ok = false;
          detail = "non-monotone indices at trial " + std::to_string(trial);
        }
      }
      if (script.serialize() != text) {
        ok = false;
        detail = "round-trip mismatch at trial " + std::to_string(trial);
        break;
      }
    } catch (const lwt::ParseError&) {
      // the only permitted failure mode
    }
  }
  report("10000 fuzzed inputs parse cleanly or fail with a typed error", ok, detail);
}

}  // namespace

int main() {
  check_fixture_fidelity();
  check_oracle_accuracy();
  check_parallel_equivalence();
  check_indexing();
  check_arithmetic_grid();
  check_cost_accounting();
  check_ablation_plumbing();
  check_record_replay();
  check_parser_fuzz();
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 9 criteria passed\n";
  return 0;
}

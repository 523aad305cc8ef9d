// kNoT command line: run single queries, benchmark task grids, validate and
// visualize LWT scripts, record fixtures, and inspect ablation variants.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knot/http_backend.hpp"
#include "knot/lwt.hpp"
#include "knot/metrics.hpp"
#include "knot/oracle.hpp"
#include "knot/pipeline.hpp"
#include "knot/runtime.hpp"
#include "knot/tasks.hpp"

namespace {

namespace fs = std::filesystem;
using namespace knot;

struct CommonOptions {
  std::string backend = "oracle";
  std::string assets_dir = KNOT_ASSET_DIR;
  std::string model = "gpt-3.5-turbo-16k";
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "KNOT_API_KEY";
  double temperature = 0.0;
  int max_tokens = 4096;
  unsigned parallelism = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--backend", opts.backend,
                  "oracle | http | replay:PATH | replay-strict:PATH | record:PATH "
                  "(oracle and replay need no network or key)");
  cmd->add_option("--assets", opts.assets_dir, "task prompt bundle directory");
  cmd->add_option("--model", opts.model, "model name for the http backend");
  cmd->add_option("--base-url", opts.base_url, "chat-completion endpoint base URL");
  cmd->add_option("--api-key-env", opts.api_key_env,
                  "environment variable holding the API key (http backend only)");
  cmd->add_option("--temperature", opts.temperature, "sampling temperature");
  cmd->add_option("--max-tokens", opts.max_tokens, "maximum output tokens");
  cmd->add_option("-j,--parallelism", opts.parallelism, "max in-flight inferences");
}

std::shared_ptr<Backend> make_backend(const CommonOptions& opts) {
  if (opts.backend == "oracle") return std::make_shared<OracleBackend>();
  if (opts.backend == "http") {
    HttpBackendConfig cfg;
    cfg.base_url = opts.base_url;
    cfg.model = opts.model;
    cfg.api_key_env = opts.api_key_env;
    cfg.temperature = opts.temperature;
    cfg.max_output_tokens = opts.max_tokens;
    return std::make_shared<HttpBackend>(cfg);
  }
  auto split = opts.backend.find(':');
  if (split != std::string::npos) {
    std::string kind = opts.backend.substr(0, split);
    std::string path = opts.backend.substr(split + 1);
    if (kind == "replay") return std::make_shared<ReplayBackend>(path, ReplayMode::Replay);
    if (kind == "replay-strict")
      return std::make_shared<ReplayBackend>(path, ReplayMode::ReplayStrict);
    if (kind == "record")
      return std::make_shared<ReplayBackend>(path, ReplayMode::Record,
                                             std::make_shared<OracleBackend>());
  }
  throw CLI::ValidationError("--backend", "unknown backend '" + opts.backend + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

metrics::SampleRecord run_sample(tasks::TaskName task, int size, std::uint64_t seed,
                                 const pipeline::PromptParts& parts,
                                 const pipeline::AblationConfig& abl, Backend& exec_backend,
                                 unsigned parallelism) {
  metrics::SampleRecord record;
  record.seed = seed;
  auto inst = tasks::generate(task, size, seed);
  record.ground_truth = tasks::ground_truth(inst);
  auto [query, bindings] = tasks::render(inst);
  auto started = std::chrono::steady_clock::now();
  try {
    auto planner = pipeline::FixturePlannerBackend::for_instance(inst);
    auto result =
        pipeline::run_knot(query, bindings, parts, abl, planner, exec_backend, parallelism);
    record.raw_answer = result.answer;
    record.usage = result.trace.total_usage();
    auto normalized = tasks::normalize(task, result.answer);
    if (normalized) {
      record.normalized_answer = *normalized;
      record.correct = *normalized == tasks::normalize(task, record.ground_truth);
    } else {
      record.unparseable = true;
    }
  } catch (const std::exception& e) {
    record.error = e.what();
  }
  record.latency_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return record;
}

metrics::SampleRecord run_baseline_sample(pipeline::BaselineKind kind, tasks::TaskName task,
                                          int size, std::uint64_t seed,
                                          const pipeline::PromptParts& parts,
                                          const pipeline::BaselinePrompts& baseline,
                                          Backend& backend) {
  metrics::SampleRecord record;
  record.seed = seed;
  auto inst = tasks::generate(task, size, seed);
  record.ground_truth = tasks::ground_truth(inst);
  auto [query, bindings] = tasks::render(inst);
  auto started = std::chrono::steady_clock::now();
  try {
    record.raw_answer = pipeline::run_baseline(kind, query, parts.context_description,
                                               baseline, backend);
    auto normalized = tasks::normalize(task, record.raw_answer);
    if (normalized) {
      record.normalized_answer = *normalized;
      record.correct = *normalized == tasks::normalize(task, record.ground_truth);
    } else {
      record.unparseable = true;
    }
  } catch (const std::exception& e) {
    record.error = e.what();
  }
  record.latency_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return record;
}

int cmd_run(const CommonOptions& opts, const std::string& task_name, int size,
            std::uint64_t seed, const std::string& trace_path) {
  auto task = tasks::task_from_string(task_name);
  auto parts = pipeline::load_prompt_parts(fs::path(opts.assets_dir) / "tasks", task);
  auto exec_backend = make_backend(opts);
  auto inst = tasks::generate(task, size, seed);
  auto [query, bindings] = tasks::render(inst);
  auto planner = pipeline::FixturePlannerBackend::for_instance(inst);

  std::shared_ptr<Backend> plan_backend;
  if (opts.backend == "http")
    plan_backend = exec_backend;  // live runs plan with the live model
  auto result = pipeline::run_knot(query, bindings, parts, {},
                                   plan_backend ? *plan_backend : planner, *exec_backend,
                                   opts.parallelism);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    out << trace_to_jsonl(result.trace);
    std::cerr << "trace written to " << trace_path << "\n";
  }
  auto normalized = tasks::normalize(task, result.answer);
  nlohmann::json report = {
      {"task", task_name},
      {"size", size},
      {"seed", seed},
      {"query", query},
      {"answer", result.answer},
      {"normalized", normalized ? nlohmann::json(*normalized) : nlohmann::json()},
      {"ground_truth", tasks::ground_truth(inst)},
      {"steps", result.trace.steps.size()},
  };
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_bench(const CommonOptions& opts, const std::vector<std::string>& task_names,
              std::vector<int> sizes, const std::vector<std::string>& schemes, int n,
              std::uint64_t seed0, const std::string& out_path, const std::string& csv_path,
              double price_in, double price_out, const std::string& ablation_mask) {
  if (n <= 0) throw CLI::ValidationError("-n", "sample count must be positive");
  pipeline::AblationConfig abl;
  if (!ablation_mask.empty()) {
    if (ablation_mask.size() != 6)
      throw CLI::ValidationError("--ablation", "mask must be six 0/1 characters");
    abl.include_context_in_extraction = ablation_mask[0] == '1';
    abl.include_elementary_commands = ablation_mask[1] == '1';
    abl.include_restriction_commands = ablation_mask[2] == '1';
    abl.include_context_in_translation = ablation_mask[3] == '1';
    abl.include_translation_instructions = ablation_mask[4] == '1';
    abl.include_lwt_example = ablation_mask[5] == '1';
  }

  auto backend = make_backend(opts);
  std::vector<metrics::BenchResult> results;
  for (const auto& task_name : task_names) {
    auto task = tasks::task_from_string(task_name);
    auto parts = pipeline::load_prompt_parts(fs::path(opts.assets_dir) / "tasks", task);
    auto baseline = pipeline::load_baseline_prompts(fs::path(opts.assets_dir) / "tasks", task);
    std::vector<int> task_sizes = sizes.empty() ? tasks::supported_sizes(task) : sizes;
    for (int size : task_sizes) {
      auto supported = tasks::supported_sizes(task);
      if (std::find(supported.begin(), supported.end(), size) == supported.end()) continue;
      for (const auto& scheme : schemes) {
        std::vector<metrics::SampleRecord> samples(n);
        std::mutex next_mutex;
        int next = 0;
        auto worker = [&] {
          while (true) {
            int i;
            {
              std::lock_guard lock(next_mutex);
              if (next >= n) return;
              i = next++;
            }
            std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
            if (scheme == "knot") {
              samples[i] = run_sample(task, size, seed, parts, abl, *backend, 1);
            } else if (scheme == "zero_shot") {
              samples[i] = run_baseline_sample(pipeline::BaselineKind::ZeroShot, task, size,
                                               seed, parts, baseline, *backend);
            } else if (scheme == "few_shot") {
              samples[i] = run_baseline_sample(pipeline::BaselineKind::FewShot, task, size,
                                               seed, parts, baseline, *backend);
            } else if (scheme == "zero_cot") {
              samples[i] = run_baseline_sample(pipeline::BaselineKind::ZeroCoT, task, size,
                                               seed, parts, baseline, *backend);
            } else if (scheme == "cot") {
              samples[i] = run_baseline_sample(pipeline::BaselineKind::CoT, task, size, seed,
                                               parts, baseline, *backend);
            } else {
              throw std::runtime_error("unknown scheme '" + scheme + "'");
            }
          }
        };
        unsigned workers = std::max(1u, opts.parallelism);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::string label = scheme;
        if (scheme == "knot" && !abl.full()) label += ":" + abl.mask();
        results.push_back(metrics::score(task_name, size, label, std::move(samples)));
      }
    }
  }

  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : results) {
    auto j = metrics::to_json(r);
    if (price_in > 0 || price_out > 0)
      j["estimated_cost"] = metrics::estimate_cost(r.usage, {price_in, price_out});
    report.push_back(std::move(j));
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << report.dump(2) << "\n";
    std::cerr << "report written to " << out_path << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << metrics::format_csv(results);
    std::cerr << "csv written to " << csv_path << "\n";
  }
  std::cerr << metrics::format_table(results);
  for (const auto& r : results)
    if (r.n_correct != r.n_samples) return 1;
  return 0;
}

int cmd_validate(const std::string& path, std::vector<std::string> binding_names) {
  auto script = lwt::parse_script(read_file(path));
  std::set<std::string> names(binding_names.begin(), binding_names.end());
  if (names.empty()) names = script.named_inputs;  // validate against its own inputs
  auto report = lwt::validate_script(script, names);
  for (const auto& err : report.errors)
    std::cerr << "error [" << lwt::to_string(err.kind) << "] " << err.message << "\n";
  for (const auto& warn : report.warnings) std::cerr << "warning: " << warn.message << "\n";
  std::cout << report.errors.size() << " errors, " << report.warnings.size() << " warnings\n";
  return report.ok() ? 0 : 1;
}

int cmd_graph(const std::string& path, const std::string& out_path) {
  auto script = lwt::parse_script(read_file(path));
  std::string dot = lwt::to_dot(script);
  if (out_path.empty()) {
    std::cout << dot;
  } else {
    std::ofstream out(out_path);
    out << dot;
    std::cerr << "graph written to " << out_path << "\n";
  }
  return 0;
}

int cmd_record(const CommonOptions& opts, const std::string& task_name, int size,
               std::uint64_t seed, int count, const std::string& fixture_path) {
  auto task = tasks::task_from_string(task_name);
  auto parts = pipeline::load_prompt_parts(fs::path(opts.assets_dir) / "tasks", task);
  std::shared_ptr<Backend> inner =
      opts.backend == "http" ? make_backend(opts) : std::make_shared<OracleBackend>();
  ReplayBackend recorder(fixture_path, ReplayMode::Record, inner);
  for (int i = 0; i < count; ++i) {
    std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    auto inst = tasks::generate(task, size, s);
    auto [query, bindings] = tasks::render(inst);
    auto planner = pipeline::FixturePlannerBackend::for_instance(inst);
    pipeline::run_knot(query, bindings, parts, {}, planner, recorder);
  }
  std::cerr << "fixture " << fixture_path << " now holds " << recorder.size() << " prompts\n";
  return 0;
}

int cmd_ablate(const CommonOptions& opts, const std::string& task_name, std::uint64_t seed,
               const std::string& out_dir) {
  auto task = tasks::task_from_string(task_name);
  auto parts = pipeline::load_prompt_parts(fs::path(opts.assets_dir) / "tasks", task);
  int size = tasks::supported_sizes(task).front();
  auto inst = tasks::generate(task, size, seed);
  auto [query, bindings] = tasks::render(inst);

  nlohmann::json summary = nlohmann::json::array();
  for (int off = -1; off < 6; ++off) {
    pipeline::AblationConfig abl;
    if (off == 0) abl.include_context_in_extraction = false;
    if (off == 1) abl.include_elementary_commands = false;
    if (off == 2) abl.include_restriction_commands = false;
    if (off == 3) abl.include_context_in_translation = false;
    if (off == 4) abl.include_translation_instructions = false;
    if (off == 5) abl.include_lwt_example = false;
    std::string extraction = pipeline::build_extraction_prompt(query, parts, abl);
    pipeline::SolutionPlan plan{tasks::fixture_plan(task)};
    std::string translation = pipeline::build_translation_prompt(plan, query, parts, abl);
    summary.push_back({{"mask", abl.mask()},
                       {"extraction_chars", metrics::count_scalars(extraction)},
                       {"translation_chars", metrics::count_scalars(translation)}});
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream e(fs::path(out_dir) / ("extraction_" + abl.mask() + ".txt"));
      e << extraction;
      std::ofstream t(fs::path(out_dir) / ("translation_" + abl.mask() + ".txt"));
      t << translation;
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kNoT: LWT script execution, benchmarking, and tooling"};
  app.require_subcommand(1);

  CommonOptions opts;

  std::string task_name = "arithmetic";
  int size = 8;
  std::uint64_t seed = 0;
  std::string trace_path;
  auto* run = app.add_subcommand("run", "run one query through the kNoT pipeline");
  add_common(run, opts);
  run->add_option("--task", task_name, "task name")->required();
  run->add_option("--size", size, "problem size")->required();
  run->add_option("--seed", seed, "instance seed");
  run->add_option("--trace", trace_path, "write the execution trace as JSON Lines");

  std::vector<std::string> bench_tasks;
  std::vector<int> bench_sizes;
  std::vector<std::string> bench_schemes{"knot"};
  int n = 100;
  std::string out_path, csv_path, ablation_mask;
  double price_in = 0.0, price_out = 0.0;
  auto* bench = app.add_subcommand("bench", "benchmark a task/size/scheme grid");
  add_common(bench, opts);
  bench->add_option("--tasks", bench_tasks, "task names")->required();
  bench->add_option("--sizes", bench_sizes, "problem sizes (default: all supported)");
  bench->add_option("--schemes", bench_schemes, "knot | zero_shot | few_shot | zero_cot | cot");
  bench->add_option("-n", n, "samples per cell (default 100)");
  bench->add_option("--seed", seed, "first sample seed");
  bench->add_option("-o,--out", out_path, "report JSON path");
  bench->add_option("--csv", csv_path, "CSV export path");
  bench->add_option("--price-in", price_in, "currency per 1K prompt tokens");
  bench->add_option("--price-out", price_out, "currency per 1K completion tokens");
  bench->add_option("--ablation", ablation_mask, "six-character 0/1 mask for components 1-6");

  std::string script_path, dot_path;
  std::vector<std::string> binding_names;
  auto* validate = app.add_subcommand("validate", "parse and validate an LWT script file");
  validate->add_option("path", script_path, "script file")->required();
  validate->add_option("--bindings", binding_names, "named inputs available at runtime");

  auto* graph = app.add_subcommand("graph", "emit the script's dependency graph as DOT");
  graph->add_option("path", script_path, "script file")->required();
  graph->add_option("-o,--out", dot_path, "output path (default stdout)");

  int record_count = 1;
  std::string fixture_path;
  auto* record = app.add_subcommand("record", "record prompt/response fixtures for replay");
  add_common(record, opts);
  record->add_option("--task", task_name, "task name")->required();
  record->add_option("--size", size, "problem size")->required();
  record->add_option("--seed", seed, "first instance seed");
  record->add_option("--count", record_count, "number of instances");
  record->add_option("--fixture", fixture_path, "fixture JSONL path")->required();

  std::string ablate_dir;
  auto* ablate = app.add_subcommand("ablate", "emit prompt variants for each ablation flag");
  add_common(ablate, opts);
  ablate->add_option("--task", task_name, "task name")->required();
  ablate->add_option("--seed", seed, "instance seed");
  ablate->add_option("--out-dir", ablate_dir, "write prompt variants to this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts, task_name, size, seed, trace_path);
    if (bench->parsed())
      return cmd_bench(opts, bench_tasks, bench_sizes, bench_schemes, n, seed, out_path,
                       csv_path, price_in, price_out, ablation_mask);
    if (validate->parsed()) return cmd_validate(script_path, binding_names);
    if (graph->parsed()) return cmd_graph(script_path, dot_path);
    if (record->parsed())
      return cmd_record(opts, task_name, size, seed, record_count, fixture_path);
    if (ablate->parsed()) return cmd_ablate(opts, task_name, seed, ablate_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

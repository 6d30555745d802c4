#include "situate/config.hpp"
#include "situate/dataset.hpp"
#include "situate/eval.hpp"
#include "situate/pipeline.hpp"
#include "situate/qagen.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace situate;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kGenerationError = 3,
  kIoError = 4,
  kSchemaError = 5,
  kSplitError = 6,
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("situate");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SITUATE_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

struct GenerateArgs {
  std::string config;
  bool toy = false;
  std::size_t scenes = 0;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  int max_attempts = 25;
};

int cmd_generate(const GenerateArgs& a) {
  GenerationConfig config = a.toy ? toy_config() : default_config();
  if (!a.config.empty()) config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  validate_config(config);

  spdlog::info("generating {} scene(s) into {} with {} job(s), config {}", a.scenes, a.out, a.jobs,
               config_hash_hex(config));
  const RunLog log = generate_dataset(config, {a.scenes, a.out, a.jobs, a.max_attempts});
  for (const auto& e : log.entries) {
    if (e.accepted) {
      spdlog::debug("{} attempt {}: accepted after {} repaint(s), {:.2f}s", e.scene_id, e.attempt,
                    e.retries_used, e.seconds);
    } else {
      spdlog::info("{} attempt {}: rejected ({})", e.scene_id, e.attempt, e.reason);
    }
  }
  spdlog::info("{} of {} scene(s) accepted in {:.1f}s", log.accepted, log.requested, log.seconds);
  if (!log.complete()) {
    spdlog::error("{} scene slot(s) exhausted the attempt cap; see run_log.json",
                  log.requested - log.accepted);
    return kGenerationError;
  }
  return kOk;
}

int cmd_qa(const std::string& scenes, const std::string& out, int budget,
           const std::string& templates_path, double adv_keep) {
  const QuestionTemplates templates =
      templates_path.empty() ? default_templates() : load_templates(templates_path);
  QaOptions options;
  options.budget = budget;
  options.adversarial_keep_probability = adv_keep;
  const QaResult result = generate_qa(scenes, options, templates);
  for (const auto& s : result.skipped) spdlog::debug("skipped {}", s);
  write_manifest(result.manifest, out);
  spdlog::info("wrote {} item(s) to {}", result.manifest.items.size(), out);
  return kOk;
}

int cmd_balance(const std::string& manifest_path, const std::string& out, std::uint64_t seed) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  Rng rng(derive_seed(seed, 0xba1));
  BalanceResult result = balance(manifest, training_profile(), rng);
  result.manifest.provenance.parameters["balance_seed"] = std::to_string(seed);
  result.manifest.provenance.parameters["profile"] = "training";
  for (const auto& [c, missing] : result.shortfall) {
    spdlog::warn("class {}: short by {} item(s)", c, missing);
  }
  if (result.dropped_outside_profile > 0) {
    spdlog::info("dropped {} item(s) outside the profile's classes", result.dropped_outside_profile);
  }
  write_manifest(result.manifest, out);
  spdlog::info("wrote {} item(s) to {}", result.manifest.items.size(), out);
  return kOk;
}

int cmd_split(const std::string& manifest_path, const std::string& out_test,
              const std::string& out_train, std::size_t per_class, int max_class,
              std::uint64_t seed, bool as_json) {
  const DatasetManifest pool = read_manifest(manifest_path);
  Rng rng(derive_seed(seed, 0x5b1));
  SplitResult split = build_test_split(pool, max_class, per_class, rng);
  split.test.provenance.parameters["split_seed"] = std::to_string(seed);
  split.train.provenance.parameters["split_seed"] = std::to_string(seed);
  write_manifest(split.test, out_test);
  if (!out_train.empty()) write_manifest(split.train, out_train);
  if (as_json) {
    std::cout << nlohmann::json{{"test", split.test.items.size()},
                                {"train", split.train.items.size()},
                                {"dropped", pool.items.size() - split.test.items.size() -
                                                split.train.items.size()}}
                     .dump()
              << '\n';
  } else {
    std::cout << "test:  " << split.test.items.size() << "\ntrain: " << split.train.items.size()
              << '\n';
  }
  return kOk;
}

int cmd_stats(const std::string& manifest_path, bool as_json) {
  const DatasetStats s = stats(read_manifest(manifest_path));
  if (as_json) {
    std::cout << stats_to_json(s).dump(2) << '\n';
  } else {
    std::cout << format_stats(s);
  }
  return kOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& preds_path, int max_class,
             bool as_json) {
  const DatasetManifest manifest = read_manifest(manifest_path);
  const auto preds = read_predictions(preds_path);
  const auto pairs = pair_predictions(preds, manifest);
  const EvalReport report = evaluate(pairs, max_class);
  if (as_json) {
    std::cout << report_to_json(report).dump(2) << '\n';
  } else {
    std::cout << format_report(report);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Synthetic counting VQA dataset generator and evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  GenerateArgs gen;
  std::uint64_t seed_value = 0;
  auto* generate = app.add_subcommand("generate", "Sample, render and validate scenes");
  auto* config_opt = generate->add_option("--config", gen.config, "JSON configuration file")
                         ->check(CLI::ExistingFile);
  generate->add_flag("--toy", gen.toy, "128x72, 1 spp, 2 cameras preset")->excludes(config_opt);
  generate->add_option("--scenes", gen.scenes, "Number of accepted scenes")->required();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = generate->add_option("--seed", seed_value, "Override the config seed");
  generate->add_option("--max-attempts", gen.max_attempts, "Samples tried per scene slot")
      ->check(CLI::PositiveNumber);

  std::string qa_scenes, qa_out, qa_templates;
  int qa_budget = 4;
  double qa_adv_keep = 0.5;
  auto* qa = app.add_subcommand("qa", "Generate question/answer items for generated scenes");
  qa->add_option("--scenes", qa_scenes, "Generate output or scenes directory")->required();
  qa->add_option("--out", qa_out, "Manifest path (.jsonl)")->required();
  qa->add_option("--budget", qa_budget, "Questions per image")->check(CLI::NonNegativeNumber);
  qa->add_option("--templates", qa_templates, "Question templates JSON")->check(CLI::ExistingFile);
  qa->add_option("--adversarial-keep", qa_adv_keep, "Keep probability for adversarial items")
      ->check(CLI::Range(0.0, 1.0));

  std::string bal_manifest, bal_out;
  std::uint64_t bal_seed = 0;
  auto* bal = app.add_subcommand("balance", "Subsample toward the training answer profile");
  bal->add_option("--manifest", bal_manifest)->required()->check(CLI::ExistingFile);
  bal->add_option("--out", bal_out)->required();
  bal->add_option("--seed", bal_seed);

  std::string split_manifest, split_test, split_train;
  std::size_t split_per_class = 31;
  int split_max_class = 15;
  std::uint64_t split_seed = 0;
  bool split_json = false;
  auto* split = app.add_subcommand("split", "Scene-disjoint test split with a fixed count per class");
  split->add_option("--manifest", split_manifest)->required()->check(CLI::ExistingFile);
  split->add_option("--out-test", split_test)->required();
  split->add_option("--out-train", split_train);
  split->add_option("--per-class", split_per_class);
  split->add_option("--max-class", split_max_class)->check(CLI::NonNegativeNumber);
  split->add_option("--seed", split_seed);
  split->add_flag("--json", split_json);

  std::string stats_manifest;
  bool stats_json = false;
  auto* st = app.add_subcommand("stats", "Answer histogram and per-type counts");
  st->add_option("--manifest", stats_manifest)->required()->check(CLI::ExistingFile);
  st->add_flag("--json", stats_json);

  std::string eval_manifest, eval_preds;
  int eval_max_class = 15;
  bool eval_json = false;
  auto* ev = app.add_subcommand("eval", "Score predictions against a manifest");
  ev->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--preds", eval_preds, "Line-delimited JSON {item_id, raw_answer}")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--max-class", eval_max_class)->check(CLI::NonNegativeNumber);
  ev->add_flag("--json", eval_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) {
      if (*seed_opt) gen.seed = seed_value;
      return cmd_generate(gen);
    }
    if (*qa) return cmd_qa(qa_scenes, qa_out, qa_budget, qa_templates, qa_adv_keep);
    if (*bal) return cmd_balance(bal_manifest, bal_out, bal_seed);
    if (*split) {
      return cmd_split(split_manifest, split_test, split_train, split_per_class, split_max_class,
                       split_seed, split_json);
    }
    if (*st) return cmd_stats(stats_manifest, stats_json);
    if (*ev) return cmd_eval(eval_manifest, eval_preds, eval_max_class, eval_json);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const GenerationError& e) {
    spdlog::error("generation failed: {}", e.what());
    return kGenerationError;
  } catch (const IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return kIoError;
  } catch (const SchemaError& e) {
    spdlog::error("schema error: {}", e.what());
    return kSchemaError;
  } catch (const SplitError& e) {
    spdlog::error("split error: {}", e.what());
    return kSplitError;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("I/O error: {}", e.what());
    return kIoError;
  }
  return kUsage;
}

#pragma once

#include "situate/config.hpp"
#include "situate/contrast.hpp"
#include "situate/dataset.hpp"
#include "situate/qagen.hpp"
#include "situate/render.hpp"
#include "situate/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace situate {

// One sampled scene (a slot may need several) and what became of it.
struct RunLogEntry {
  std::string scene_id;
  std::uint64_t slot = 0;
  std::uint64_t attempt = 0;
  bool accepted = false;
  std::string reason;  // empty when accepted
  int retries_used = 0;
  double seconds = 0.0;
  std::vector<std::filesystem::path> outputs;
};

struct RunLog {
  std::vector<RunLogEntry> entries;
  std::size_t requested = 0;
  std::size_t accepted = 0;
  double seconds = 0.0;

  bool complete() const { return accepted == requested; }
};

nlohmann::json run_log_to_json(const RunLog& log);

struct GeneratedScene {
  SceneGraph scene;
  std::vector<RenderOutput> outputs;
  ContrastReport report;
  std::vector<RunLogEntry> attempts;  // last entry is the accepted one, if any
  bool accepted = false;
};

// Samples, builds, renders and validates slot `slot`, resampling with fresh
// attempts until one passes or `max_attempts` is reached. Output depends only
// on (config, slot).
GeneratedScene generate_scene(const GenerationConfig& config, std::uint64_t slot,
                              int max_attempts = 25, int jobs = 1);

// Writes view<k>.png, view<k>.seg.png, scene.json and validation.json into
// `scene_dir`. Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> write_scene(const GeneratedScene& generated,
                                               const std::filesystem::path& scene_dir);

struct GenerateOptions {
  std::size_t scenes = 0;
  std::filesystem::path out_dir;
  int jobs = 1;
  int max_attempts = 25;
};

// Generates `scenes` slots in parallel into <out_dir>/scenes/<scene_id>/ and
// writes <out_dir>/generation.json (config, hash, seed) and run_log.json.
// Slots that exhaust their attempts are logged and skipped. Throws IoError.
RunLog generate_dataset(const GenerationConfig& config, const GenerateOptions& options);

struct QaOptions {
  int budget = 4;
  double adversarial_keep_probability = 0.5;
};

struct QaResult {
  DatasetManifest manifest;
  std::vector<std::string> skipped;
};

// `dir` is either a generate output directory (containing scenes/) or the
// scenes directory itself. Every subdirectory must hold a scene.json.
// Throws IoError naming the scene on missing files, SchemaError on bad JSON.
QaResult generate_qa(const std::filesystem::path& dir, const QaOptions& options,
                     const QuestionTemplates& templates = default_templates());

}  // namespace situate

#include "situate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace situate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
}

// First object below the visibility threshold, if any.
std::optional<std::string> visibility_failure(const SceneGraph& scene,
                                              std::span<const RenderOutput> outputs,
                                              int min_visible_pixels) {
  const int max_id = static_cast<int>(scene.objects.size());
  std::vector<std::size_t> total(static_cast<std::size_t>(max_id) + 1, 0);
  for (const auto& out : outputs) {
    const auto counts = instance_pixel_counts(out, max_id);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += counts[i];
  }
  for (const auto& obj : scene.objects) {
    const auto px = total[static_cast<std::size_t>(obj.object_id)];
    if (px < static_cast<std::size_t>(min_visible_pixels)) {
      return "object " + std::to_string(obj.object_id) + " visible in only " + std::to_string(px) +
             " pixels";
    }
  }
  return std::nullopt;
}

json entry_json(const RunLogEntry& e) {
  json outputs = json::array();
  for (const auto& p : e.outputs) outputs.push_back(p.generic_string());
  return {{"scene_id", e.scene_id}, {"slot", e.slot},         {"attempt", e.attempt},
          {"accepted", e.accepted}, {"reason", e.reason},     {"retries_used", e.retries_used},
          {"seconds", e.seconds},   {"outputs", outputs}};
}

}  // namespace

json run_log_to_json(const RunLog& log) {
  json entries = json::array();
  for (const auto& e : log.entries) entries.push_back(entry_json(e));
  return {{"requested", log.requested},
          {"accepted", log.accepted},
          {"seconds", log.seconds},
          {"entries", entries}};
}

GeneratedScene generate_scene(const GenerationConfig& config, std::uint64_t slot, int max_attempts,
                              int jobs) {
  const RenderSettings settings = render_settings(config.image);
  GeneratedScene result;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const auto start = Clock::now();
    RunLogEntry entry;
    entry.slot = slot;
    entry.attempt = static_cast<std::uint64_t>(attempt);
    entry.scene_id = scene_id_for(slot);

    try {
      const SceneSpec spec = sample_scene_spec(config, slot, static_cast<std::uint64_t>(attempt));
      SceneGraph scene = build_scene(spec);
      auto outputs = render_scene_all_views(scene, settings, jobs);
      if (auto why = visibility_failure(scene, outputs, config.validation.min_visible_pixels)) {
        entry.reason = *why;
      } else {
        RepairResult repaired = validate_and_repair(std::move(scene), std::move(outputs),
                                                    config.validation, settings, jobs);
        entry.retries_used = repaired.report.retries_used;
        if (repaired.accepted) {
          entry.accepted = true;
          result.scene = std::move(repaired.scene);
          result.outputs = std::move(repaired.outputs);
          result.report = std::move(repaired.report);
        } else {
          entry.reason = "contrast below threshold after " +
                         std::to_string(repaired.report.retries_used) + " repaints";
        }
      }
    } catch (const GenerationError& e) {
      entry.reason = e.what();
    }

    entry.seconds = seconds_since(start);
    result.attempts.push_back(std::move(entry));
    if (result.attempts.back().accepted) {
      result.accepted = true;
      break;
    }
  }
  return result;
}

std::vector<fs::path> write_scene(const GeneratedScene& generated, const fs::path& scene_dir) {
  std::error_code ec;
  fs::create_directories(scene_dir, ec);
  if (ec) throw IoError("cannot create " + scene_dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  for (const auto& out : generated.outputs) {
    const fs::path rgb = scene_dir / ("view" + std::to_string(out.camera_index) + ".png");
    write_png(out, rgb);
    written.push_back(rgb);
    written.push_back(segmentation_path(rgb));
  }
  const fs::path scene_json = scene_dir / "scene.json";
  write_text(scene_json, scene_to_json(generated.scene).dump(2) + "\n");
  written.push_back(scene_json);

  json validation = contrast_report_to_json(generated.report);
  validation["attempts"] = generated.attempts.size();
  const fs::path validation_json = scene_dir / "validation.json";
  write_text(validation_json, validation.dump(2) + "\n");
  written.push_back(validation_json);
  return written;
}

RunLog generate_dataset(const GenerationConfig& config, const GenerateOptions& options) {
  const auto start = Clock::now();
  const fs::path scenes_root = options.out_dir / "scenes";
  std::error_code ec;
  fs::create_directories(scenes_root, ec);
  if (ec) throw IoError("cannot create " + scenes_root.string() + ": " + ec.message());

  json generation = {{"config", config_to_json(config)},
                     {"config_hash", config_hash_hex(config)},
                     {"seed", config.seed},
                     {"tool_version", kToolVersion},
                     {"scenes", options.scenes}};
  write_text(options.out_dir / "generation.json", generation.dump(2) + "\n");

  const std::size_t n = options.scenes;
  const int jobs = std::max(1, options.jobs);
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
  // Leftover threads go to rendering when there are fewer scenes than jobs.
  const int render_jobs = workers > 0 ? std::max(1, jobs / workers) : 1;

  std::vector<std::vector<RunLogEntry>> per_slot(n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= n) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      try {
        GeneratedScene generated = generate_scene(config, slot, options.max_attempts, render_jobs);
        if (generated.accepted) {
          generated.attempts.back().outputs =
              write_scene(generated, scenes_root / generated.scene.scene_id);
        }
        per_slot[slot] = std::move(generated.attempts);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  for (int i = 1; i < workers; ++i) threads.emplace_back(worker);
  if (workers > 0) worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  RunLog log;
  log.requested = n;
  for (auto& entries : per_slot) {
    for (auto& e : entries) {
      log.accepted += e.accepted;
      log.entries.push_back(std::move(e));
    }
  }
  log.seconds = seconds_since(start);
  write_text(options.out_dir / "run_log.json", run_log_to_json(log).dump(2) + "\n");
  return log;
}

QaResult generate_qa(const fs::path& dir, const QaOptions& options,
                     const QuestionTemplates& templates) {
  fs::path scenes_dir = dir / "scenes";
  fs::path ref_prefix = "scenes";
  fs::path root = dir;
  if (!fs::is_directory(scenes_dir)) {
    scenes_dir = dir;
    root = dir.parent_path();
    ref_prefix = dir.filename();
  }
  if (!fs::is_directory(scenes_dir)) throw IoError("not a directory: " + scenes_dir.string());

  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(scenes_dir)) {
    if (entry.is_directory()) scene_dirs.push_back(entry.path());
  }
  std::sort(scene_dirs.begin(), scene_dirs.end());

  Provenance provenance;
  const fs::path generation_json = root / "generation.json";
  if (fs::exists(generation_json)) {
    const json g = read_json_file(generation_json);
    if (g.contains("config_hash") && g["config_hash"].is_string())
      provenance.config_hash = g["config_hash"].get<std::string>();
    if (g.contains("seed") && g["seed"].is_number_unsigned())
      provenance.seed = g["seed"].get<std::uint64_t>();
  }

  QaResult result;
  std::vector<QAItem> items;
  for (const auto& scene_dir : scene_dirs) {
    const fs::path scene_json = scene_dir / "scene.json";
    if (!fs::exists(scene_json)) {
      throw IoError("scene '" + scene_dir.filename().string() + "' has no scene.json (" +
                    scene_json.string() + ")");
    }
    SceneGraph scene;
    try {
      scene = scene_from_json(read_json_file(scene_json));
    } catch (const SchemaError& e) {
      const std::string what = e.what();
      if (what.rfind(scene_json.string(), 0) == 0) throw;
      throw SchemaError(scene_json.string() + ": " + what);
    }
    const SceneMetadata metadata = derive_metadata(scene);
    for (std::size_t view = 0; view < scene.cameras.size(); ++view) {
      const std::string ref =
          (ref_prefix / scene_dir.filename() / ("view" + std::to_string(view) + ".png"))
              .generic_string();
      Rng rng(derive_seed(scene.rng_stream, 0x9a, view));
      QuestionBatch batch =
          generate_questions(metadata, scene, ref, static_cast<int>(view), rng, templates);
      for (auto& s : batch.skipped) result.skipped.push_back(ref + ": " + s);
      for (auto& item : batch.items) items.push_back(std::move(item));
    }
  }

  Rng rng(derive_seed(provenance.seed.value_or(0), 0xa55e));
  result.manifest = assemble(std::move(items), options.budget, rng, options.adversarial_keep_probability);
  provenance.parameters = result.manifest.provenance.parameters;
  result.manifest.provenance = provenance;
  return result;
}

}  // namespace situate

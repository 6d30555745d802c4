#include "situate/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace situate {

using nlohmann::json;

BalanceProfile training_profile() {
  return {{3100, 3100, 3100, 3100, 3100, 3100, 2277, 1358, 842, 545, 479, 470, 441, 442, 453, 445}};
}

DatasetManifest assemble(std::vector<QAItem> items, int per_image_budget, Rng& rng,
                         double adversarial_keep_probability) {
  // Group item indices per image, in first-seen order of images sorted by ref.
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < items.size(); ++i) {
    by_image[items[i].image_ref].push_back(i);
  }

  std::vector<std::size_t> keep;
  const auto budget = static_cast<std::size_t>(std::max(0, per_image_budget));
  for (auto& [ref, indices] : by_image) {
    std::vector<std::size_t> unique;
    std::set<std::string> seen;
    for (auto i : indices) {
      if (seen.insert(items[i].question).second) unique.push_back(i);
    }
    if (unique.size() <= budget) {
      keep.insert(keep.end(), unique.begin(), unique.end());
      continue;
    }

    std::vector<std::size_t> adversarial;
    std::vector<std::size_t> regular;
    for (auto i : unique) {
      (items[i].question_type == QuestionType::Adversarial ? adversarial : regular).push_back(i);
    }
    std::vector<std::size_t> chosen;
    for (auto i : adversarial) {
      if (chosen.size() < budget && rng.bernoulli(adversarial_keep_probability)) chosen.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(regular));
    for (auto i : regular) {
      if (chosen.size() >= budget) break;
      chosen.push_back(i);
    }
    // Top up with adversarial items if the regular ones ran out.
    for (auto i : adversarial) {
      if (chosen.size() >= budget) break;
      if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
    }
    keep.insert(keep.end(), chosen.begin(), chosen.end());
  }
  std::sort(keep.begin(), keep.end());

  DatasetManifest m;
  m.split = "all";
  m.items.reserve(keep.size());
  for (auto i : keep) m.items.push_back(std::move(items[i]));
  m.provenance.parameters["per_image_budget"] = std::to_string(per_image_budget);
  return m;
}

BalanceResult balance(const DatasetManifest& manifest, const BalanceProfile& profile, Rng& rng) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    by_class[manifest.items[i].numeric_gt].push_back(i);
  }

  BalanceResult result;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < profile.targets.size(); ++c) {
    const std::size_t target = profile.targets[c];
    auto it = by_class.find(static_cast<int>(c));
    std::vector<std::size_t> members = it == by_class.end() ? std::vector<std::size_t>{} : it->second;
    if (members.size() > target) {
      rng.shuffle(std::span<std::size_t>(members));
      members.resize(target);
    } else if (members.size() < target) {
      result.shortfall[static_cast<int>(c)] = target - members.size();
    }
    keep.insert(keep.end(), members.begin(), members.end());
  }
  for (const auto& [c, members] : by_class) {
    if (c < 0 || static_cast<std::size_t>(c) >= profile.targets.size()) {
      result.dropped_outside_profile += members.size();
    }
  }
  std::sort(keep.begin(), keep.end());

  result.manifest.split = manifest.split;
  result.manifest.provenance = manifest.provenance;
  result.manifest.provenance.parameters["balanced"] = "true";
  for (auto i : keep) result.manifest.items.push_back(manifest.items[i]);
  return result;
}

SplitResult build_test_split(const DatasetManifest& pool, int max_class, std::size_t per_class,
                             Rng& rng) {
  SplitResult result;
  result.test.split = "test";
  result.train.split = "train";
  result.test.provenance = pool.provenance;
  result.train.provenance = pool.provenance;
  result.test.provenance.parameters["per_class"] = std::to_string(per_class);
  result.train.provenance.parameters["per_class"] = std::to_string(per_class);

  std::vector<std::size_t> supply(static_cast<std::size_t>(max_class) + 1, 0);
  for (const auto& item : pool.items) {
    if (item.numeric_gt <= max_class) ++supply[static_cast<std::size_t>(item.numeric_gt)];
  }
  for (int c = 0; c <= max_class; ++c) {
    if (supply[static_cast<std::size_t>(c)] < per_class) {
      throw SplitError("insufficient items for class " + std::to_string(c) + ": need " +
                       std::to_string(per_class) + ", have " +
                       std::to_string(supply[static_cast<std::size_t>(c)]));
    }
  }

  std::map<std::string, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < pool.items.size(); ++i) {
    by_scene[pool.items[i].scene_id].push_back(i);
  }
  std::vector<std::string> scenes;
  for (const auto& [id, _] : by_scene) scenes.push_back(id);
  rng.shuffle(std::span<std::string>(scenes));

  std::vector<std::size_t> need(static_cast<std::size_t>(max_class) + 1, per_class);
  std::set<std::string> test_scenes;
  std::vector<std::size_t> test_items;
  std::size_t remaining = per_class * need.size();
  for (const auto& scene : scenes) {
    if (remaining == 0) break;
    bool used = false;
    for (auto i : by_scene[scene]) {
      const int c = pool.items[i].numeric_gt;
      if (c > max_class || need[static_cast<std::size_t>(c)] == 0) continue;
      --need[static_cast<std::size_t>(c)];
      --remaining;
      test_items.push_back(i);
      used = true;
    }
    if (used) test_scenes.insert(scene);
  }
  for (int c = 0; c <= max_class; ++c) {
    if (need[static_cast<std::size_t>(c)] != 0) {
      throw SplitError("could not fill class " + std::to_string(c) + " from whole scenes");
    }
  }

  std::sort(test_items.begin(), test_items.end());
  for (auto i : test_items) result.test.items.push_back(pool.items[i]);
  for (const auto& item : pool.items) {
    if (!test_scenes.contains(item.scene_id)) result.train.items.push_back(item);
  }
  return result;
}

namespace {

json provenance_json(const Provenance& p) {
  json j;
  j["config_hash"] = p.config_hash ? json(*p.config_hash) : json(nullptr);
  j["seed"] = p.seed ? json(*p.seed) : json(nullptr);
  j["tool_version"] = p.tool_version;
  j["parameters"] = p.parameters;
  return j;
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  if (j.contains("config_hash") && j["config_hash"].is_string())
    p.config_hash = j["config_hash"].get<std::string>();
  if (j.contains("seed") && j["seed"].is_number_unsigned()) p.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tool_version") && j["tool_version"].is_string())
    p.tool_version = j["tool_version"].get<std::string>();
  if (j.contains("parameters") && j["parameters"].is_object())
    p.parameters = j["parameters"].get<std::map<std::string, std::string>>();
  return p;
}

}  // namespace

std::filesystem::path manifest_meta_path(const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p += ".meta.json";
  return p;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    for (const auto& item : manifest.items) {
      out << qa_item_to_json(item).dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("error while writing manifest: " + path.string());
  }
  const auto meta_path = manifest_meta_path(path);
  std::ofstream meta(meta_path, std::ios::binary | std::ios::trunc);
  if (!meta) throw IoError("cannot write " + meta_path.string());
  const json j = {{"split", manifest.split},
                  {"provenance", provenance_json(manifest.provenance)},
                  {"stats", stats_to_json(stats(manifest))}};
  meta << j.dump(2) << '\n';
  meta.flush();
  if (!meta) throw IoError("error while writing " + meta_path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  DatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(where + ": invalid JSON: " + e.what());
    }
    try {
      QAItem item = qa_item_from_json(j);
      if (!ids.insert(item.item_id).second) {
        throw SchemaError("duplicate item_id '" + item.item_id + "'");
      }
      m.items.push_back(std::move(item));
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }

  const auto meta_path = manifest_meta_path(path);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta(meta_path, std::ios::binary);
    json j;
    try {
      j = json::parse(meta);
    } catch (const json::parse_error& e) {
      throw SchemaError(meta_path.string() + ": invalid JSON: " + e.what());
    }
    if (j.contains("split") && j["split"].is_string()) m.split = j["split"].get<std::string>();
    if (j.contains("provenance")) m.provenance = provenance_from_json(j["provenance"]);
  }
  return m;
}

DatasetStats stats(const DatasetManifest& manifest) {
  DatasetStats s;
  for (auto t : kAllQuestionTypes) s.per_type[std::string(question_type_name(t))] = 0;
  for (const auto& item : manifest.items) {
    ++s.total;
    ++s.histogram[item.numeric_gt];
    ++s.per_type[std::string(question_type_name(item.question_type))];
    ++s.per_shape[item.filter.shape ? std::string(shape_name(*item.filter.shape)) : "any"];
  }
  return s;
}

std::string format_stats(const DatasetStats& s) {
  std::ostringstream out;
  out << "items: " << s.total << "\n\n";
  out << std::left << std::setw(10) << "gt" << std::right << std::setw(10) << "items" << '\n';
  for (const auto& [gt, n] : s.histogram) {
    out << std::left << std::setw(10) << gt << std::right << std::setw(10) << n << '\n';
  }
  out << '\n' << std::left << std::setw(14) << "type" << std::right << std::setw(10) << "items" << '\n';
  for (const auto& [t, n] : s.per_type) {
    out << std::left << std::setw(14) << t << std::right << std::setw(10) << n << '\n';
  }
  out << '\n' << std::left << std::setw(14) << "shape" << std::right << std::setw(10) << "items" << '\n';
  for (const auto& [sh, n] : s.per_shape) {
    out << std::left << std::setw(14) << sh << std::right << std::setw(10) << n << '\n';
  }
  return out.str();
}

json stats_to_json(const DatasetStats& s) {
  json hist = json::object();
  for (const auto& [gt, n] : s.histogram) hist[std::to_string(gt)] = n;
  return {{"total", s.total}, {"histogram", hist}, {"per_type", s.per_type}, {"per_shape", s.per_shape}};
}

}  // namespace situate

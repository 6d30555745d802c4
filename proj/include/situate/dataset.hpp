#pragma once

#include "situate/qagen.hpp"
#include "situate/random.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace situate {

inline constexpr const char* kToolVersion = "situate 1.0.0";

class SplitError : public Error {
 public:
  using Error::Error;
};

struct Provenance {
  std::optional<std::string> config_hash;
  std::optional<std::uint64_t> seed;
  std::string tool_version = kToolVersion;
  // Free-form reproducibility parameters (budget, profile, split sizes).
  std::map<std::string, std::string> parameters;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DatasetManifest {
  std::string split = "train";  // "train", "test" or "all"
  std::vector<QAItem> items;
  Provenance provenance;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Target item count per numeric_gt class; index = class.
struct BalanceProfile {
  std::vector<std::size_t> targets;
};

// Training-answer distribution: 3,100 each for 0-5, then the long tail to 15.
BalanceProfile training_profile();

// Keeps at most `per_image_budget` items per image after dropping duplicate
// questions. When trimming, an adversarial item survives with probability
// `adversarial_keep_probability`; the rest of the budget is a uniform sample
// of the remaining items. Item order is preserved.
DatasetManifest assemble(std::vector<QAItem> items, int per_image_budget, Rng& rng,
                         double adversarial_keep_probability = 0.5);

struct BalanceResult {
  DatasetManifest manifest;
  std::map<int, std::size_t> shortfall;  // class -> missing items
  std::size_t dropped_outside_profile = 0;
};

// Uniformly subsamples over-supplied classes down to their target. Never
// duplicates; classes above the profile's range are dropped.
BalanceResult balance(const DatasetManifest& manifest, const BalanceProfile& profile, Rng& rng);

struct SplitResult {
  DatasetManifest test;
  DatasetManifest train;  // items from scenes that contribute nothing to test
};

// Exactly `per_class` test items for each class 0..max_class, taken from
// whole scenes so no scene straddles the split. Throws SplitError naming
// the first class with too few items.
SplitResult build_test_split(const DatasetManifest& pool, int max_class, std::size_t per_class,
                             Rng& rng);

// Line-delimited JSON, one QAItem per line. Split, provenance and stats go to
// the sidecar `<path>.meta.json`, which read_manifest picks up if present.
std::filesystem::path manifest_meta_path(const std::filesystem::path& manifest_path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
// Throws IoError, or SchemaError with the offending line number.
DatasetManifest read_manifest(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t total = 0;
  std::map<int, std::size_t> histogram;                 // numeric_gt -> items
  std::map<std::string, std::size_t> per_type;          // question type -> items
  std::map<std::string, std::size_t> per_shape;         // filter shape ("any" if unset)
};

DatasetStats stats(const DatasetManifest& manifest);
std::string format_stats(const DatasetStats& s);
nlohmann::json stats_to_json(const DatasetStats& s);

}  // namespace situate

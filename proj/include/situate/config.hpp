#pragma once

#include "situate/types.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace situate {

template <typename T>
struct ClosedRange {
  T low{};
  T high{};

  bool contains(T v) const { return low <= v && v <= high; }
  friend bool operator==(const ClosedRange&, const ClosedRange&) = default;
};

using RealRange = ClosedRange<double>;
using IntRange = ClosedRange<std::int64_t>;

struct ImageProperties {
  int width = 1024;
  int height = 576;
  int samples_per_pixel = 16;
  int cameras_per_scene = 5;

  friend bool operator==(const ImageProperties&, const ImageProperties&) = default;
};

struct EnvironmentSettings {
  RealRange light_strength{9.0, 15.0};
  // x, y, z extents of the room in meters.
  std::array<RealRange, 3> room_dims{RealRange{12.0, 16.0}, RealRange{12.0, 16.0},
                                     RealRange{4.0, 5.0}};
  std::vector<std::string> floor_texture_palette;
  std::vector<std::string> wall_texture_palette;

  friend bool operator==(const EnvironmentSettings&, const EnvironmentSettings&) = default;
};

struct ObjectSettings {
  IntRange count_range{5, 15};
  // Indexed by Shape.
  std::array<RealRange, 4> size_range_per_shape{};
  // Indexed by Zone.
  std::array<double, 5> zone_probabilities{};
  std::vector<NamedColor> color_palette;

  friend bool operator==(const ObjectSettings&, const ObjectSettings&) = default;
};

struct ValidationSettings {
  double delta_e_threshold = 12.5;
  int dilation_radius = 2;
  int max_retries = 5;
  // Objects owning fewer pixels than this summed over all views cause the
  // scene to be resampled.
  int min_visible_pixels = 25;

  friend bool operator==(const ValidationSettings&, const ValidationSettings&) = default;
};

struct GenerationConfig {
  ImageProperties image;
  EnvironmentSettings environment;
  ObjectSettings objects;
  ValidationSettings validation;
  std::uint64_t seed = 0;

  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

struct ObjectSpec {
  Shape shape{};
  NamedColor color;
  double size = 0.0;
  Zone zone{};

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

struct SceneSpec {
  std::string scene_id;
  std::uint64_t scene_index = 0;
  std::uint64_t attempt = 0;
  std::vector<ObjectSpec> object_specs;
  Vector3d room_dims = Vector3d::Zero();
  double light_strength = 0.0;
  std::string floor_texture;
  std::string wall_texture;
  int camera_count = 0;
  // Size ranges and palette carried along so downstream stages (size
  // resampling, color repair) need no access to the config.
  std::array<RealRange, 4> size_range_per_shape{};
  std::vector<NamedColor> color_palette;
  std::vector<std::string> floor_texture_palette;
  std::vector<std::string> wall_texture_palette;
  std::uint64_t rng_stream = 0;

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

// Parses and validates a JSON configuration document. Unknown keys are
// rejected. Throws ConfigError with line/column on malformed JSON, or naming
// the offending field on invariant violations.
GenerationConfig parse_config(std::string_view text);
GenerationConfig load_config(const std::filesystem::path& path);

// Throws ConfigError naming the first violated field.
void validate_config(const GenerationConfig& config);

nlohmann::json config_to_json(const GenerationConfig& config);
std::uint64_t config_hash(const GenerationConfig& config);
// 16 lowercase hex digits.
std::string config_hash_hex(const GenerationConfig& config);

// 1024x576, 16 spp, 5 cameras, 5-15 objects, threshold 12.5.
GenerationConfig default_config();
// 128x72, 1 spp, 2 cameras; fast enough for CI.
GenerationConfig toy_config();

std::string scene_id_for(std::uint64_t scene_index);

// Pure function of (config.seed, scene_index, attempt). Attempt > 0 is used
// to draw a fresh sample for a slot whose earlier sample was rejected.
SceneSpec sample_scene_spec(const GenerationConfig& config, std::uint64_t scene_index,
                            std::uint64_t attempt = 0);

}  // namespace situate

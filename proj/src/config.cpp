#include "situate/config.hpp"

#include "situate/random.hpp"
#include "situate/texture.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <initializer_list>
#include <sstream>

namespace situate {

using nlohmann::json;

namespace {

// Smallest room that still holds the table, the side zones and the camera arc.
constexpr double kMinRoomHorizontal = 9.0;
constexpr double kMinRoomHeight = 3.0;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) {
      known = known || key == a;
    }
    if (!known) {
      throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown key");
    }
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw ConfigError(path + ": expected an integer");
  }
  return j.get<std::int64_t>();
}

double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path + ": expected a number");
  }
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path + ": expected a string");
  }
  return j.get<std::string>();
}

RealRange get_real_range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(path + ": expected [low, high]");
  }
  return {get_real(j[0], path + "[0]"), get_real(j[1], path + "[1]")};
}

IntRange get_int_range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(path + ": expected [low, high]");
  }
  return {get_int(j[0], path + "[0]"), get_int(j[1], path + "[1]")};
}

std::vector<std::string> get_string_list(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw ConfigError(path + ": expected an array of strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

int checked_int(const json& j, const std::string& path) {
  const auto v = get_int(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path + ": out of range");
  }
  return static_cast<int>(v);
}

void apply_image(const json& j, ImageProperties& image) {
  check_keys(j, "image", {"width", "height", "samples_per_pixel", "cameras_per_scene"});
  if (j.contains("width")) image.width = checked_int(j["width"], "image.width");
  if (j.contains("height")) image.height = checked_int(j["height"], "image.height");
  if (j.contains("samples_per_pixel"))
    image.samples_per_pixel = checked_int(j["samples_per_pixel"], "image.samples_per_pixel");
  if (j.contains("cameras_per_scene"))
    image.cameras_per_scene = checked_int(j["cameras_per_scene"], "image.cameras_per_scene");
}

void apply_environment(const json& j, EnvironmentSettings& env) {
  const std::string path = "environment";
  check_keys(j, path,
             {"light_strength", "room_dims", "floor_texture_palette", "wall_texture_palette"});
  if (j.contains("light_strength"))
    env.light_strength = get_real_range(j["light_strength"], path + ".light_strength");
  if (j.contains("room_dims")) {
    const auto& dims = j["room_dims"];
    check_keys(dims, path + ".room_dims", {"x", "y", "z"});
    const std::array<std::string_view, 3> axes{"x", "y", "z"};
    for (std::size_t a = 0; a < 3; ++a) {
      if (dims.contains(axes[a])) {
        env.room_dims[a] =
            get_real_range(dims[std::string(axes[a])], join(path + ".room_dims", axes[a]));
      }
    }
  }
  if (j.contains("floor_texture_palette"))
    env.floor_texture_palette =
        get_string_list(j["floor_texture_palette"], path + ".floor_texture_palette");
  if (j.contains("wall_texture_palette"))
    env.wall_texture_palette =
        get_string_list(j["wall_texture_palette"], path + ".wall_texture_palette");
}

void apply_objects(const json& j, ObjectSettings& obj) {
  const std::string path = "objects";
  check_keys(j, path,
             {"count_range", "size_range_per_shape", "zone_probabilities", "color_palette"});
  if (j.contains("count_range"))
    obj.count_range = get_int_range(j["count_range"], path + ".count_range");

  if (j.contains("size_range_per_shape")) {
    const auto& sizes = j["size_range_per_shape"];
    check_keys(sizes, path + ".size_range_per_shape", {"cube", "sphere", "cone", "cylinder"});
    for (Shape s : kAllShapes) {
      const std::string key(shape_name(s));
      if (sizes.contains(key)) {
        obj.size_range_per_shape[static_cast<std::size_t>(s)] =
            get_real_range(sizes[key], path + ".size_range_per_shape." + key);
      }
    }
  }

  if (j.contains("zone_probabilities")) {
    const auto& zp = j["zone_probabilities"];
    const std::string zpath = path + ".zone_probabilities";
    if (!zp.is_object()) {
      throw ConfigError(zpath + ": expected an object");
    }
    std::array<double, 5> probs{};
    std::array<bool, 5> seen{};
    for (const auto& [key, value] : zp.items()) {
      const auto zone = parse_zone(key);
      if (!zone) {
        throw ConfigError(zpath + "." + key + ": unknown key");
      }
      const auto idx = static_cast<std::size_t>(*zone);
      if (seen[idx]) {
        throw ConfigError(zpath + "." + key + ": zone given twice");
      }
      seen[idx] = true;
      probs[idx] = get_real(value, zpath + "." + key);
    }
    obj.zone_probabilities = probs;
  }

  if (j.contains("color_palette")) {
    const auto& pal = j["color_palette"];
    const std::string ppath = path + ".color_palette";
    if (!pal.is_array()) {
      throw ConfigError(ppath + ": expected an array");
    }
    obj.color_palette.clear();
    for (std::size_t i = 0; i < pal.size(); ++i) {
      const std::string epath = ppath + "[" + std::to_string(i) + "]";
      check_keys(pal[i], epath, {"name", "rgb"});
      if (!pal[i].contains("name") || !pal[i].contains("rgb")) {
        throw ConfigError(epath + ": needs name and rgb");
      }
      NamedColor c;
      c.name = get_string(pal[i]["name"], epath + ".name");
      const auto& rgb = pal[i]["rgb"];
      if (!rgb.is_array() || rgb.size() != 3) {
        throw ConfigError(epath + ".rgb: expected [r, g, b]");
      }
      for (std::size_t k = 0; k < 3; ++k) {
        const auto v = get_int(rgb[k], epath + ".rgb");
        if (v < 0 || v > 255) {
          throw ConfigError(epath + ".rgb: channel outside [0, 255]");
        }
        c.rgb[k] = static_cast<std::uint8_t>(v);
      }
      obj.color_palette.push_back(std::move(c));
    }
  }
}

void apply_validation(const json& j, ValidationSettings& val) {
  const std::string path = "validation";
  check_keys(j, path,
             {"delta_e_threshold", "dilation_radius", "max_retries", "min_visible_pixels"});
  if (j.contains("delta_e_threshold"))
    val.delta_e_threshold = get_real(j["delta_e_threshold"], path + ".delta_e_threshold");
  if (j.contains("dilation_radius"))
    val.dilation_radius = checked_int(j["dilation_radius"], path + ".dilation_radius");
  if (j.contains("max_retries"))
    val.max_retries = checked_int(j["max_retries"], path + ".max_retries");
  if (j.contains("min_visible_pixels"))
    val.min_visible_pixels = checked_int(j["min_visible_pixels"], path + ".min_visible_pixels");
}

void require_positive_range(const RealRange& r, const std::string& path) {
  if (!(r.low > 0.0) || !(r.low <= r.high) || !std::isfinite(r.high)) {
    throw ConfigError(path + ": requires 0 < low <= high");
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json range_json(const RealRange& r) { return json::array({r.low, r.high}); }

}  // namespace

void validate_config(const GenerationConfig& config) {
  const auto& img = config.image;
  if (img.width < 64) throw ConfigError("image.width: must be >= 64");
  if (img.height < 64) throw ConfigError("image.height: must be >= 64");
  if (img.samples_per_pixel < 1) throw ConfigError("image.samples_per_pixel: must be >= 1");
  if (img.cameras_per_scene < 1) throw ConfigError("image.cameras_per_scene: must be >= 1");

  const auto& env = config.environment;
  require_positive_range(env.light_strength, "environment.light_strength");
  const std::array<const char*, 3> axes{"x", "y", "z"};
  for (std::size_t a = 0; a < 3; ++a) {
    const std::string path = std::string("environment.room_dims.") + axes[a];
    require_positive_range(env.room_dims[a], path);
    const double min_extent = a < 2 ? kMinRoomHorizontal : kMinRoomHeight;
    if (env.room_dims[a].low < min_extent) {
      throw ConfigError(path + ": room too small for the table layout (low >= " +
                        std::to_string(min_extent) + " m required)");
    }
  }
  if (env.floor_texture_palette.empty())
    throw ConfigError("environment.floor_texture_palette: must not be empty");
  if (env.wall_texture_palette.empty())
    throw ConfigError("environment.wall_texture_palette: must not be empty");
  for (const auto& id : env.floor_texture_palette) {
    try {
      parse_texture(id);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment.floor_texture_palette: ") + e.what());
    }
  }
  for (const auto& id : env.wall_texture_palette) {
    try {
      parse_texture(id);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("environment.wall_texture_palette: ") + e.what());
    }
  }

  const auto& obj = config.objects;
  if (obj.count_range.low < 0 || obj.count_range.high < obj.count_range.low)
    throw ConfigError("objects.count_range: requires 0 <= low <= high");
  for (Shape s : kAllShapes) {
    require_positive_range(obj.size_range_per_shape[static_cast<std::size_t>(s)],
                           "objects.size_range_per_shape." + std::string(shape_name(s)));
  }
  double total = 0.0;
  for (Zone z : kAllZones) {
    const double p = obj.zone_probabilities[static_cast<std::size_t>(z)];
    if (!(p >= 0.0)) {
      throw ConfigError("objects.zone_probabilities: " + std::string(zone_name(z)) +
                        " must be >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("objects.zone_probabilities: must sum to 1 (got " + std::to_string(total) +
                      ")");
  }
  if (obj.color_palette.size() < 2)
    throw ConfigError("objects.color_palette: needs at least 2 entries");
  for (std::size_t i = 0; i < obj.color_palette.size(); ++i) {
    if (obj.color_palette[i].name.empty())
      throw ConfigError("objects.color_palette: empty color name");
    for (std::size_t k = 0; k < i; ++k) {
      if (obj.color_palette[k].name == obj.color_palette[i].name)
        throw ConfigError("objects.color_palette: duplicate color '" + obj.color_palette[i].name +
                          "'");
    }
  }

  const auto& val = config.validation;
  if (!(val.delta_e_threshold > 0.0))
    throw ConfigError("validation.delta_e_threshold: must be > 0");
  if (val.dilation_radius < 1) throw ConfigError("validation.dilation_radius: must be >= 1");
  if (val.max_retries < 1) throw ConfigError("validation.max_retries: must be >= 1");
  if (val.min_visible_pixels < 1)
    throw ConfigError("validation.min_visible_pixels: must be >= 1");
}

GenerationConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }

  GenerationConfig config = default_config();
  check_keys(doc, "", {"image", "environment", "objects", "validation", "seed"});
  if (doc.contains("image")) apply_image(doc["image"], config.image);
  if (doc.contains("environment")) apply_environment(doc["environment"], config.environment);
  if (doc.contains("objects")) apply_objects(doc["objects"], config.objects);
  if (doc.contains("validation")) apply_validation(doc["validation"], config.validation);
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    config.seed = s.get<std::uint64_t>();
  }
  validate_config(config);
  return config;
}

GenerationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json config_to_json(const GenerationConfig& config) {
  json j;
  j["image"] = {{"width", config.image.width},
                {"height", config.image.height},
                {"samples_per_pixel", config.image.samples_per_pixel},
                {"cameras_per_scene", config.image.cameras_per_scene}};
  const auto& env = config.environment;
  j["environment"] = {{"light_strength", range_json(env.light_strength)},
                      {"room_dims",
                       {{"x", range_json(env.room_dims[0])},
                        {"y", range_json(env.room_dims[1])},
                        {"z", range_json(env.room_dims[2])}}},
                      {"floor_texture_palette", env.floor_texture_palette},
                      {"wall_texture_palette", env.wall_texture_palette}};
  json sizes = json::object();
  for (Shape s : kAllShapes) {
    sizes[std::string(shape_name(s))] =
        range_json(config.objects.size_range_per_shape[static_cast<std::size_t>(s)]);
  }
  json zones = json::object();
  for (Zone z : kAllZones) {
    zones[std::string(zone_name(z))] =
        config.objects.zone_probabilities[static_cast<std::size_t>(z)];
  }
  json palette = json::array();
  for (const auto& c : config.objects.color_palette) {
    palette.push_back({{"name", c.name}, {"rgb", {c.rgb[0], c.rgb[1], c.rgb[2]}}});
  }
  j["objects"] = {
      {"count_range", {config.objects.count_range.low, config.objects.count_range.high}},
      {"size_range_per_shape", sizes},
      {"zone_probabilities", zones},
      {"color_palette", palette}};
  j["validation"] = {{"delta_e_threshold", config.validation.delta_e_threshold},
                     {"dilation_radius", config.validation.dilation_radius},
                     {"max_retries", config.validation.max_retries},
                     {"min_visible_pixels", config.validation.min_visible_pixels}};
  j["seed"] = config.seed;
  return j;
}

std::uint64_t config_hash(const GenerationConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(canonical.data()), canonical.size()});
}

std::string config_hash_hex(const GenerationConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

GenerationConfig default_config() {
  GenerationConfig c;
  c.environment.floor_texture_palette = {
      "checker:white/gray",  "noise:sand/brown",       "solid:lightgray",
      "noise:slate/darkgray", "checker:cream/sage",    "stripes:beige/sand",
      "noise:terracotta/maroon", "solid:darkgray",
  };
  c.environment.wall_texture_palette = {
      "solid:cream", "solid:lightgray", "noise:sage/white", "stripes:white/beige",
      "solid:slate", "noise:beige/sand", "solid:teal",
  };
  c.objects.size_range_per_shape = {RealRange{0.14, 0.28}, RealRange{0.14, 0.28},
                                    RealRange{0.14, 0.28}, RealRange{0.14, 0.28}};
  c.objects.zone_probabilities = {0.4, 0.15, 0.15, 0.15, 0.15};
  c.objects.color_palette = {
      {"red", {200, 30, 30}},     {"green", {40, 160, 60}},  {"blue", {30, 70, 200}},
      {"yellow", {235, 205, 40}}, {"purple", {130, 50, 160}}, {"orange", {240, 130, 20}},
      {"cyan", {40, 190, 210}},   {"pink", {240, 120, 170}},
  };
  return c;
}

GenerationConfig toy_config() {
  GenerationConfig c = default_config();
  c.image.width = 128;
  c.image.height = 72;
  c.image.samples_per_pixel = 1;
  c.image.cameras_per_scene = 2;
  c.validation.min_visible_pixels = 4;
  return c;
}

std::string scene_id_for(std::uint64_t scene_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05llu", static_cast<unsigned long long>(scene_index));
  return buf;
}

SceneSpec sample_scene_spec(const GenerationConfig& config, std::uint64_t scene_index,
                            std::uint64_t attempt) {
  const std::uint64_t stream = derive_seed(config.seed, scene_index, attempt);
  Rng rng(stream);

  SceneSpec spec;
  spec.scene_id = scene_id_for(scene_index);
  spec.scene_index = scene_index;
  spec.attempt = attempt;
  spec.rng_stream = derive_seed(stream, 0x5ce7e);

  const auto& env = config.environment;
  for (int a = 0; a < 3; ++a) {
    spec.room_dims[a] = rng.uniform(env.room_dims[a].low, env.room_dims[a].high);
  }
  spec.light_strength = rng.uniform(env.light_strength.low, env.light_strength.high);
  spec.floor_texture = env.floor_texture_palette[rng.index(env.floor_texture_palette.size())];
  spec.wall_texture = env.wall_texture_palette[rng.index(env.wall_texture_palette.size())];
  spec.camera_count = config.image.cameras_per_scene;

  const auto& obj = config.objects;
  const auto count = rng.uniform_int(obj.count_range.low, obj.count_range.high);
  spec.object_specs.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    ObjectSpec o;
    o.shape = kAllShapes[rng.index(kAllShapes.size())];
    o.color = obj.color_palette[rng.index(obj.color_palette.size())];
    const auto& sr = obj.size_range_per_shape[static_cast<std::size_t>(o.shape)];
    o.size = rng.uniform(sr.low, sr.high);
    o.zone = kAllZones[rng.categorical(obj.zone_probabilities)];
    spec.object_specs.push_back(std::move(o));
  }

  spec.size_range_per_shape = obj.size_range_per_shape;
  spec.color_palette = obj.color_palette;
  spec.floor_texture_palette = env.floor_texture_palette;
  spec.wall_texture_palette = env.wall_texture_palette;
  return spec;
}

}  // namespace situate

#include <doctest.h>

#include "situate/config.hpp"

#include <cmath>
#include <string>

using namespace situate;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

json base_doc() { return config_to_json(default_config()); }

}  // namespace

TEST_CASE("defaults") {
  const auto c = default_config();
  CHECK(c.image.width == 1024);
  CHECK(c.image.height == 576);
  CHECK(c.image.cameras_per_scene == 5);
  CHECK(c.objects.count_range.low == 5);
  CHECK(c.objects.count_range.high == 15);
  CHECK(c.validation.delta_e_threshold == 12.5);
  CHECK_NOTHROW(validate_config(c));
  CHECK_NOTHROW(validate_config(toy_config()));
  CHECK(toy_config().image.width == 128);
  CHECK(toy_config().image.height == 72);
  CHECK(toy_config().image.samples_per_pixel == 1);
  CHECK(toy_config().image.cameras_per_scene == 2);
}

TEST_CASE("json round trip") {
  const auto c = toy_config();
  CHECK(parse_config(config_to_json(c).dump()) == c);
  CHECK(config_hash(c) == config_hash(parse_config(config_to_json(c).dump(2))));
  CHECK(config_hash(c) != config_hash(default_config()));
  CHECK(config_hash_hex(c).size() == 16);
}

TEST_CASE("minimal document with zone aliases") {
  const auto c = parse_config(R"({
    "objects": {"zone_probabilities": {"on_table": 0.4, "under": 0.15, "left": 0.15,
                                        "right": 0.15, "front": 0.15}}
  })");
  CHECK(c.objects.zone_probabilities[static_cast<int>(Zone::UnderTable)] == doctest::Approx(0.15));
  CHECK(c.image == default_config().image);
}

TEST_CASE("resolution is echoed") {
  auto doc = base_doc();
  doc["image"]["width"] = 1024;
  doc["image"]["height"] = 576;
  const auto c = parse_config(doc.dump());
  CHECK(c.image.width == 1024);
  CHECK(c.image.height == 576);
}

TEST_CASE("invariant violations name the field") {
  auto doc = base_doc();
  doc["objects"]["zone_probabilities"]["on_table"] = 0.3;  // sums to 0.9
  CHECK(error_of(doc.dump()).find("objects.zone_probabilities") != std::string::npos);

  doc = base_doc();
  doc["image"]["width"] = 32;
  CHECK(error_of(doc.dump()).find("image.width") != std::string::npos);

  doc = base_doc();
  doc["objects"]["count_range"] = {9, 4};
  CHECK(error_of(doc.dump()).find("objects.count_range") != std::string::npos);

  doc = base_doc();
  doc["objects"]["size_range_per_shape"]["cone"] = {0.0, 0.2};
  CHECK(error_of(doc.dump()).find("cone") != std::string::npos);

  doc = base_doc();
  doc["environment"]["light_strength"] = {5.0, 1.0};
  CHECK(error_of(doc.dump()).find("light_strength") != std::string::npos);

  doc = base_doc();
  doc["validation"]["max_retries"] = 0;
  CHECK(error_of(doc.dump()).find("validation.max_retries") != std::string::npos);

  doc = base_doc();
  doc["validation"]["delta_e_threshold"] = 0.0;
  CHECK(error_of(doc.dump()).find("validation.delta_e_threshold") != std::string::npos);

  doc = base_doc();
  doc["objects"]["color_palette"] = json::array({{{"name", "red"}, {"rgb", {255, 0, 0}}}});
  CHECK(error_of(doc.dump()).find("objects.color_palette") != std::string::npos);

  doc = base_doc();
  doc["environment"]["floor_texture_palette"] = {"marble:white"};
  CHECK(error_of(doc.dump()).find("floor_texture_palette") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
  auto doc = base_doc();
  doc["image"]["widht"] = 1024;
  CHECK(error_of(doc.dump()).find("image.widht") != std::string::npos);
  doc = base_doc();
  doc["extras"] = 1;
  CHECK(error_of(doc.dump()).find("extras") != std::string::npos);
}

TEST_CASE("malformed json reports line and column") {
  const auto err = error_of("{\n  \"seed\": 1,\n  oops\n}");
  CHECK(err.find("line 3") != std::string::npos);
  CHECK(err.find("column") != std::string::npos);
}

TEST_CASE("sample_scene_spec is deterministic and in range") {
  const auto c = default_config();
  CHECK(sample_scene_spec(c, 17) == sample_scene_spec(c, 17));
  CHECK(sample_scene_spec(c, 17) != sample_scene_spec(c, 18));
  CHECK(sample_scene_spec(c, 17, 1) != sample_scene_spec(c, 17, 0));

  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto s = sample_scene_spec(c, i);
    const auto n = static_cast<std::int64_t>(s.object_specs.size());
    REQUIRE(c.objects.count_range.contains(n));
    CHECK(c.environment.light_strength.contains(s.light_strength));
    for (int a = 0; a < 3; ++a) CHECK(c.environment.room_dims[a].contains(s.room_dims[a]));
    CHECK(s.camera_count == c.image.cameras_per_scene);
    for (const auto& o : s.object_specs) {
      CHECK(c.objects.size_range_per_shape[static_cast<std::size_t>(o.shape)].contains(o.size));
      CHECK(std::find(c.objects.color_palette.begin(), c.objects.color_palette.end(), o.color) !=
            c.objects.color_palette.end());
    }
    CHECK(std::find(c.environment.floor_texture_palette.begin(),
                    c.environment.floor_texture_palette.end(),
                    s.floor_texture) != c.environment.floor_texture_palette.end());
  }
}

TEST_CASE("degenerate zone distribution") {
  auto c = default_config();
  c.objects.zone_probabilities = {1.0, 0.0, 0.0, 0.0, 0.0};
  for (std::uint64_t i = 0; i < 200; ++i) {
    for (const auto& o : sample_scene_spec(c, i).object_specs) CHECK(o.zone == Zone::OnTable);
  }
}

TEST_CASE("zone frequencies within three standard errors") {
  auto c = default_config();
  c.objects.zone_probabilities = {0.2, 0.2, 0.2, 0.2, 0.2};
  std::array<double, 5> seen{};
  double n = 0;
  for (std::uint64_t i = 0; n < 10000; ++i) {
    for (const auto& o : sample_scene_spec(c, i).object_specs) {
      ++seen[static_cast<std::size_t>(o.zone)];
      ++n;
    }
  }
  const double se = std::sqrt(0.2 * 0.8 / n);
  for (double k : seen) CHECK(std::abs(k / n - 0.2) < 3 * se);
}

TEST_CASE("object counts are uniform over the range") {
  const auto c = default_config();
  std::array<int, 11> seen{};
  const int n = 11000;
  for (int i = 0; i < n; ++i) ++seen[sample_scene_spec(c, static_cast<std::uint64_t>(i)).object_specs.size() - 5];
  const double se = std::sqrt((1.0 / 11) * (10.0 / 11) / n);
  for (int k : seen) CHECK(std::abs(static_cast<double>(k) / n - 1.0 / 11) < 4 * se);
}

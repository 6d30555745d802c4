#pragma once

#include "situate/config.hpp"
#include "situate/random.hpp"
#include "situate/types.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace situate {

// Fixed table and zone geometry. The table is centered at the room origin
// with its top at `height`; the cameras sit on the -y side ("front").
struct TableLayout {
  double width = 2.4;   // x
  double depth = 1.2;   // y
  double height = 0.75;
  double top_thickness = 0.05;
  double leg_size = 0.08;
  double leg_inset = 0.05;
  double side_gap = 0.35;    // gap between table edge and side/front zones
  double side_width = 1.3;   // x extent of the left/right zones
  double front_depth = 0.8;  // y extent of the front zone
  std::string texture = "solid:wood";

  Box3d bounds() const;
  Box3d top() const;
  std::array<Box3d, 4> legs() const;
};

// Horizontal region an object of a zone may occupy, plus its support height.
struct ZoneRegion {
  double x_min, x_max;
  double y_min, y_max;
  double support_z;
  // Largest object size that fits vertically (under the tabletop).
  double max_size;
};

ZoneRegion zone_region(const TableLayout& layout, Zone zone);

struct Camera {
  Vector3d position = Vector3d::Zero();
  Vector3d look_at = Vector3d::Zero();
  double fov_deg = 50.0;  // vertical
  Vector3d up = Vector3d::UnitZ();

  friend bool operator==(const Camera&, const Camera&) = default;
};

struct Light {
  Vector3d position = Vector3d::Zero();
  double strength = 0.0;

  friend bool operator==(const Light&, const Light&) = default;
};

// Size is the cube edge, the sphere diameter, or the base diameter and
// height of cones and cylinders. Position is the center of the object's
// base, resting on its support surface.
struct SceneObject {
  int object_id = 0;  // >= 1; 0 is background
  Shape shape{};
  NamedColor color;
  double size = 0.0;
  Zone zone{};
  Vector3d position = Vector3d::Zero();
  double yaw = 0.0;  // cubes only
  int bin_index = 0;

  // Half extent of the footprint along x (accounts for cube yaw).
  double half_extent_x() const;
  double half_extent_y() const;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

// Palettes a scene may draw materials from when it is repainted.
struct MaterialLibrary {
  std::vector<NamedColor> colors;
  std::vector<std::string> floor_textures;
  std::vector<std::string> wall_textures;

  friend bool operator==(const MaterialLibrary&, const MaterialLibrary&) = default;
};

struct SceneGraph {
  std::string scene_id;
  std::uint64_t scene_index = 0;
  std::uint64_t rng_stream = 0;
  Box3d room;
  TableLayout table;
  std::vector<Light> lights;
  double ambient = 0.25;
  std::vector<Camera> cameras;
  std::vector<SceneObject> objects;
  std::string floor_texture;
  std::string wall_texture;
  MaterialLibrary materials;

  bool operator==(const SceneGraph& other) const;
};

// One filter over objects; unset attributes match everything.
struct CountFilter {
  std::optional<Shape> shape;
  std::optional<std::string> color;
  std::optional<Zone> zone;

  bool matches(const SceneObject& object) const;
  int attribute_count() const;
  friend bool operator==(const CountFilter&, const CountFilter&) = default;
};

struct SceneMetadata {
  using CompositeKey = std::tuple<Shape, std::string, Zone>;

  std::array<int, 4> per_shape{};
  std::array<int, 5> per_zone{};
  std::map<std::string, int> per_color;
  std::map<CompositeKey, int> composite;
  int total = 0;

  // Resolved from the composite table.
  int count(const CountFilter& filter) const;
  // Per-zone breakdown of a filter (ignores the filter's own zone, then
  // zeroes every other zone if it is set).
  std::array<int, 5> zone_breakdown(const CountFilter& filter) const;
};

using ZoneGroups = std::array<std::vector<ObjectSpec>, 5>;

struct Placement {
  Vector3d position = Vector3d::Zero();
  int bin_index = 0;
  double size = 0.0;  // possibly resampled to fit the bin
  double yaw = 0.0;
};

using ZonePlacements = std::array<std::vector<Placement>, 5>;

// Splits each zone's x extent into n equal bins for its n objects and places
// object i uniformly inside bin perm[i]. Objects whose footprint exceeds the
// bin width get their size resampled (bounded); throws GenerationError when a
// zone is over capacity.
ZonePlacements place_objects(const TableLayout& layout, const ZoneGroups& groups,
                             const std::array<RealRange, 4>& size_ranges, Rng& rng);

// Throws GenerationError when placement is infeasible.
SceneGraph build_scene(const SceneSpec& spec);

SceneMetadata derive_metadata(const SceneGraph& scene);

nlohmann::json scene_to_json(const SceneGraph& scene);
// Throws SchemaError on missing or malformed fields.
SceneGraph scene_from_json(const nlohmann::json& j);

}  // namespace situate

#include "situate/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <limits>

namespace situate {

using nlohmann::json;

namespace {

constexpr int kMaxSizeResamples = 16;
constexpr double kCameraArcDeg = 50.0;
constexpr double kCameraJitterDeg = 5.0;
constexpr RealRange kCameraElevationDeg{15.0, 40.0};
constexpr RealRange kCameraDistance{4.0, 5.0};
constexpr RealRange kCameraFovDeg{45.0, 55.0};
constexpr double kWallMargin = 0.3;
constexpr double kUnderTableClearance = 0.02;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

double half_extent(Shape shape, double size, double yaw) {
  if (shape == Shape::Cube) {
    return 0.5 * size * (std::abs(std::cos(yaw)) + std::abs(std::sin(yaw)));
  }
  return 0.5 * size;
}

Camera sample_camera(const Box3d& room, const Vector3d& look_at, int index, int count, Rng& rng) {
  double azimuth = 0.0;
  double jitter = kCameraJitterDeg;
  if (count > 1) {
    const double spacing = 2.0 * kCameraArcDeg / (count - 1);
    azimuth = -kCameraArcDeg + spacing * index;
    jitter = std::min(kCameraJitterDeg, spacing / 4.0);
  }
  azimuth += rng.uniform(-jitter, jitter);
  const double elevation = rng.uniform(kCameraElevationDeg.low, kCameraElevationDeg.high);
  double distance = rng.uniform(kCameraDistance.low, kCameraDistance.high);

  const double az = deg2rad(azimuth);
  const double el = deg2rad(elevation);
  const Vector3d dir(std::cos(el) * std::sin(az), -std::cos(el) * std::cos(az), std::sin(el));

  // Pull the camera in if it would leave the room.
  const Box3d inner(room.min() + Vector3d::Constant(kWallMargin),
                    room.max() - Vector3d::Constant(kWallMargin));
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) continue;
    const double bound = dir[a] > 0.0 ? inner.max()[a] : inner.min()[a];
    const double limit = (bound - look_at[a]) / dir[a];
    distance = std::min(distance, limit);
  }

  Camera cam;
  cam.look_at = look_at;
  cam.position = look_at + distance * dir;
  cam.fov_deg = rng.uniform(kCameraFovDeg.low, kCameraFovDeg.high);
  cam.up = Vector3d::UnitZ();
  return cam;
}

json vec_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + ": bad field '" + key + "': " + e.what());
  }
}

Vector3d vec_field(const json& j, const char* key, const std::string& where) {
  const auto v = field<std::vector<double>>(j, key, where);
  if (v.size() != 3) {
    throw SchemaError(where + ": field '" + key + "' must have 3 components");
  }
  return {v[0], v[1], v[2]};
}

json color_json(const NamedColor& c) {
  return {{"name", c.name}, {"rgb", {c.rgb[0], c.rgb[1], c.rgb[2]}}};
}

NamedColor color_from_json(const json& j, const std::string& where) {
  NamedColor c;
  c.name = field<std::string>(j, "name", where);
  const auto rgb = field<std::vector<int>>(j, "rgb", where);
  if (rgb.size() != 3) throw SchemaError(where + ": rgb must have 3 channels");
  for (std::size_t k = 0; k < 3; ++k) {
    if (rgb[k] < 0 || rgb[k] > 255) throw SchemaError(where + ": rgb channel out of range");
    c.rgb[k] = static_cast<std::uint8_t>(rgb[k]);
  }
  return c;
}

bool box_equal(const Box3d& a, const Box3d& b) { return a.min() == b.min() && a.max() == b.max(); }

}  // namespace

Box3d TableLayout::bounds() const {
  return Box3d(Vector3d(-0.5 * width, -0.5 * depth, 0.0), Vector3d(0.5 * width, 0.5 * depth, height));
}

Box3d TableLayout::top() const {
  return Box3d(Vector3d(-0.5 * width, -0.5 * depth, height - top_thickness),
               Vector3d(0.5 * width, 0.5 * depth, height));
}

std::array<Box3d, 4> TableLayout::legs() const {
  std::array<Box3d, 4> out;
  const double leg_top = height - top_thickness;
  const double x_outer = 0.5 * width - leg_inset;
  const double y_outer = 0.5 * depth - leg_inset;
  int i = 0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double x0 = sx * x_outer;
      const double x1 = sx * (x_outer - leg_size);
      const double y0 = sy * y_outer;
      const double y1 = sy * (y_outer - leg_size);
      out[i++] = Box3d(Vector3d(std::min(x0, x1), std::min(y0, y1), 0.0),
                       Vector3d(std::max(x0, x1), std::max(y0, y1), leg_top));
    }
  }
  return out;
}

ZoneRegion zone_region(const TableLayout& t, Zone zone) {
  const double hw = 0.5 * t.width;
  const double hd = 0.5 * t.depth;
  const double no_limit = std::numeric_limits<double>::infinity();
  switch (zone) {
    case Zone::OnTable:
      return {-hw, hw, -hd, hd, t.height, no_limit};
    case Zone::UnderTable: {
      // Inside the legs on every side.
      const double inner_x = hw - t.leg_inset - t.leg_size - kUnderTableClearance;
      const double inner_y = hd - t.leg_inset - t.leg_size - kUnderTableClearance;
      return {-inner_x, inner_x, -inner_y, inner_y, 0.0,
              t.height - t.top_thickness - kUnderTableClearance};
    }
    case Zone::LeftOfTable:
      return {-hw - t.side_gap - t.side_width, -hw - t.side_gap, -hd, hd, 0.0, no_limit};
    case Zone::RightOfTable:
      return {hw + t.side_gap, hw + t.side_gap + t.side_width, -hd, hd, 0.0, no_limit};
    case Zone::FrontOfTable:
      return {-hw, hw, -hd - t.side_gap - t.front_depth, -hd - t.side_gap, 0.0, no_limit};
  }
  throw GenerationError("unknown zone");
}

double SceneObject::half_extent_x() const { return half_extent(shape, size, yaw); }
double SceneObject::half_extent_y() const { return half_extent(shape, size, yaw); }

bool SceneGraph::operator==(const SceneGraph& o) const {
  return scene_id == o.scene_id && scene_index == o.scene_index && rng_stream == o.rng_stream &&
         box_equal(room, o.room) && table.width == o.table.width &&
         table.depth == o.table.depth && table.height == o.table.height &&
         table.texture == o.table.texture && lights == o.lights && ambient == o.ambient &&
         cameras == o.cameras && objects == o.objects && floor_texture == o.floor_texture &&
         wall_texture == o.wall_texture && materials == o.materials;
}

bool CountFilter::matches(const SceneObject& object) const {
  return (!shape || *shape == object.shape) && (!color || *color == object.color.name) &&
         (!zone || *zone == object.zone);
}

int CountFilter::attribute_count() const {
  return static_cast<int>(shape.has_value()) + static_cast<int>(color.has_value()) +
         static_cast<int>(zone.has_value());
}

int SceneMetadata::count(const CountFilter& filter) const {
  int n = 0;
  for (const auto& [key, c] : composite) {
    const auto& [s, col, z] = key;
    if ((!filter.shape || *filter.shape == s) && (!filter.color || *filter.color == col) &&
        (!filter.zone || *filter.zone == z)) {
      n += c;
    }
  }
  return n;
}

std::array<int, 5> SceneMetadata::zone_breakdown(const CountFilter& filter) const {
  std::array<int, 5> out{};
  for (Zone z : kAllZones) {
    if (filter.zone && *filter.zone != z) continue;
    CountFilter f = filter;
    f.zone = z;
    out[static_cast<std::size_t>(z)] = count(f);
  }
  return out;
}

ZonePlacements place_objects(const TableLayout& layout, const ZoneGroups& groups,
                             const std::array<RealRange, 4>& size_ranges, Rng& rng) {
  ZonePlacements out;
  for (Zone zone : kAllZones) {
    const auto zi = static_cast<std::size_t>(zone);
    const auto& group = groups[zi];
    if (group.empty()) continue;

    const ZoneRegion region = zone_region(layout, zone);
    const std::size_t n = group.size();
    const double extent = region.x_max - region.x_min;
    const double bin_width = extent / static_cast<double>(n);

    // Capacity: every object needs at least its shape's minimum footprint.
    for (const auto& spec : group) {
      const double min_size = size_ranges[static_cast<std::size_t>(spec.shape)].low;
      if (min_size > bin_width || min_size > region.max_size) {
        throw GenerationError("zone " + std::string(zone_name(zone)) + " over capacity: " +
                              std::to_string(n) + " objects in " + std::to_string(extent) +
                              " m");
      }
    }

    std::vector<int> bins(n);
    std::iota(bins.begin(), bins.end(), 0);
    rng.shuffle(std::span<int>(bins));

    auto& placed = out[zi];
    placed.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& spec = group[i];
      const auto& range = size_ranges[static_cast<std::size_t>(spec.shape)];
      double size = spec.size;
      double yaw = spec.shape == Shape::Cube ? rng.uniform(0.0, 0.5 * std::numbers::pi) : 0.0;
      double hx = half_extent(spec.shape, size, yaw);
      int tries = 0;
      while (2.0 * hx > bin_width || size > region.max_size ||
             2.0 * hx > region.y_max - region.y_min) {
        if (++tries > kMaxSizeResamples) {
          throw GenerationError("cannot fit " + std::string(shape_name(spec.shape)) +
                                " into a " + std::to_string(bin_width) + " m bin in zone " +
                                std::string(zone_name(zone)));
        }
        size = rng.uniform(range.low, std::min({range.high, region.max_size, bin_width}));
        if (spec.shape == Shape::Cube) {
          yaw = rng.uniform(0.0, 0.5 * std::numbers::pi);
        }
        hx = half_extent(spec.shape, size, yaw);
      }

      const int bin = bins[i];
      const double bin_lo = region.x_min + bin_width * bin;
      const double bin_hi = bin == static_cast<int>(n) - 1 ? region.x_max : bin_lo + bin_width;
      Placement p;
      p.bin_index = bin;
      p.size = size;
      p.yaw = yaw;
      p.position.x() = rng.uniform(bin_lo + hx, bin_hi - hx);
      p.position.y() = rng.uniform(region.y_min + hx, region.y_max - hx);
      p.position.z() = region.support_z;
      placed.push_back(p);
    }
  }
  return out;
}

SceneGraph build_scene(const SceneSpec& spec) {
  Rng rng(spec.rng_stream);

  SceneGraph scene;
  scene.scene_id = spec.scene_id;
  scene.scene_index = spec.scene_index;
  scene.rng_stream = spec.rng_stream;
  const Vector3d half(0.5 * spec.room_dims.x(), 0.5 * spec.room_dims.y(), 0.0);
  scene.room = Box3d(Vector3d(-half.x(), -half.y(), 0.0),
                     Vector3d(half.x(), half.y(), spec.room_dims.z()));
  scene.floor_texture = spec.floor_texture;
  scene.wall_texture = spec.wall_texture;
  scene.materials = {spec.color_palette, spec.floor_texture_palette, spec.wall_texture_palette};

  const Box3d table = scene.table.bounds();
  if (!scene.room.contains(table) || table.min().x() <= scene.room.min().x() ||
      table.max().x() >= scene.room.max().x() || table.max().z() >= scene.room.max().z()) {
    throw GenerationError("table does not fit strictly inside the room");
  }

  // Group objects by zone, remembering their original order.
  ZoneGroups groups;
  std::array<std::vector<std::size_t>, 5> order;
  for (std::size_t i = 0; i < spec.object_specs.size(); ++i) {
    const auto zi = static_cast<std::size_t>(spec.object_specs[i].zone);
    groups[zi].push_back(spec.object_specs[i]);
    order[zi].push_back(i);
  }
  const ZonePlacements placements =
      place_objects(scene.table, groups, spec.size_range_per_shape, rng);

  scene.objects.resize(spec.object_specs.size());
  for (std::size_t zi = 0; zi < 5; ++zi) {
    for (std::size_t k = 0; k < order[zi].size(); ++k) {
      const std::size_t i = order[zi][k];
      const auto& os = spec.object_specs[i];
      const auto& p = placements[zi][k];
      SceneObject& obj = scene.objects[i];
      obj.object_id = static_cast<int>(i) + 1;
      obj.shape = os.shape;
      obj.color = os.color;
      obj.size = p.size;
      obj.zone = os.zone;
      obj.position = p.position;
      obj.yaw = p.yaw;
      obj.bin_index = p.bin_index;
    }
  }

  Light light;
  light.position = Vector3d(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                            scene.room.max().z() - kWallMargin);
  light.strength = spec.light_strength;
  scene.lights.push_back(light);

  const Vector3d look_at(0.0, -0.3, 0.45);
  for (int c = 0; c < spec.camera_count; ++c) {
    scene.cameras.push_back(sample_camera(scene.room, look_at, c, spec.camera_count, rng));
  }
  return scene;
}

SceneMetadata derive_metadata(const SceneGraph& scene) {
  SceneMetadata m;
  for (const auto& o : scene.objects) {
    ++m.per_shape[static_cast<std::size_t>(o.shape)];
    ++m.per_zone[static_cast<std::size_t>(o.zone)];
    ++m.per_color[o.color.name];
    ++m.composite[{o.shape, o.color.name, o.zone}];
    ++m.total;
  }
  return m;
}

json scene_to_json(const SceneGraph& scene) {
  json j;
  j["scene_id"] = scene.scene_id;
  j["scene_index"] = scene.scene_index;
  j["rng_stream"] = scene.rng_stream;
  j["room"] = {{"min", vec_json(scene.room.min())}, {"max", vec_json(scene.room.max())}};
  j["table"] = {{"bounds",
                 {{"min", vec_json(scene.table.bounds().min())},
                  {"max", vec_json(scene.table.bounds().max())}}},
                {"width", scene.table.width},
                {"depth", scene.table.depth},
                {"height", scene.table.height},
                {"texture", scene.table.texture}};
  j["floor_texture"] = scene.floor_texture;
  j["wall_texture"] = scene.wall_texture;
  j["ambient"] = scene.ambient;
  j["lights"] = json::array();
  for (const auto& l : scene.lights) {
    j["lights"].push_back({{"position", vec_json(l.position)}, {"strength", l.strength}});
  }
  j["cameras"] = json::array();
  for (const auto& c : scene.cameras) {
    j["cameras"].push_back({{"position", vec_json(c.position)},
                            {"look_at", vec_json(c.look_at)},
                            {"fov_deg", c.fov_deg},
                            {"up", vec_json(c.up)}});
  }
  j["objects"] = json::array();
  for (const auto& o : scene.objects) {
    j["objects"].push_back({{"object_id", o.object_id},
                            {"shape", shape_name(o.shape)},
                            {"color", color_json(o.color)},
                            {"size", o.size},
                            {"zone", zone_name(o.zone)},
                            {"position", vec_json(o.position)},
                            {"yaw", o.yaw},
                            {"bin_index", o.bin_index}});
  }
  json colors = json::array();
  for (const auto& c : scene.materials.colors) colors.push_back(color_json(c));
  j["materials"] = {{"colors", colors},
                    {"floor_textures", scene.materials.floor_textures},
                    {"wall_textures", scene.materials.wall_textures}};
  return j;
}

SceneGraph scene_from_json(const json& j) {
  const std::string where = "scene";
  SceneGraph s;
  s.scene_id = field<std::string>(j, "scene_id", where);
  s.scene_index = field<std::uint64_t>(j, "scene_index", where);
  s.rng_stream = field<std::uint64_t>(j, "rng_stream", where);
  const json room = field<json>(j, "room", where);
  s.room = Box3d(vec_field(room, "min", "scene.room"), vec_field(room, "max", "scene.room"));
  const json table = field<json>(j, "table", where);
  s.table.width = field<double>(table, "width", "scene.table");
  s.table.depth = field<double>(table, "depth", "scene.table");
  s.table.height = field<double>(table, "height", "scene.table");
  s.table.texture = field<std::string>(table, "texture", "scene.table");
  s.floor_texture = field<std::string>(j, "floor_texture", where);
  s.wall_texture = field<std::string>(j, "wall_texture", where);
  s.ambient = field<double>(j, "ambient", where);

  for (const auto& l : field<json>(j, "lights", where)) {
    s.lights.push_back({vec_field(l, "position", "scene.lights"),
                        field<double>(l, "strength", "scene.lights")});
  }
  for (const auto& c : field<json>(j, "cameras", where)) {
    Camera cam;
    cam.position = vec_field(c, "position", "scene.cameras");
    cam.look_at = vec_field(c, "look_at", "scene.cameras");
    cam.fov_deg = field<double>(c, "fov_deg", "scene.cameras");
    cam.up = vec_field(c, "up", "scene.cameras");
    s.cameras.push_back(cam);
  }
  for (const auto& o : field<json>(j, "objects", where)) {
    const std::string ow = "scene.objects";
    SceneObject obj;
    obj.object_id = field<int>(o, "object_id", ow);
    const auto shape = parse_shape(field<std::string>(o, "shape", ow));
    if (!shape) throw SchemaError(ow + ": unknown shape");
    obj.shape = *shape;
    obj.color = color_from_json(field<json>(o, "color", ow), ow + ".color");
    obj.size = field<double>(o, "size", ow);
    const auto zone = parse_zone(field<std::string>(o, "zone", ow));
    if (!zone) throw SchemaError(ow + ": unknown zone");
    obj.zone = *zone;
    obj.position = vec_field(o, "position", ow);
    obj.yaw = field<double>(o, "yaw", ow);
    obj.bin_index = field<int>(o, "bin_index", ow);
    s.objects.push_back(std::move(obj));
  }
  const json mats = field<json>(j, "materials", where);
  for (const auto& c : field<json>(mats, "colors", "scene.materials")) {
    s.materials.colors.push_back(color_from_json(c, "scene.materials.colors"));
  }
  s.materials.floor_textures =
      field<std::vector<std::string>>(mats, "floor_textures", "scene.materials");
  s.materials.wall_textures =
      field<std::vector<std::string>>(mats, "wall_textures", "scene.materials");
  return s;
}

}  // namespace situate

#include "situate/render.hpp"

#include "situate/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <thread>

namespace situate {

namespace {

constexpr double kShadowEpsilon = 1e-5;

const std::array<double, 256>& srgb_to_linear_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

std::uint8_t linear_to_srgb8(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const double c = v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
  return static_cast<std::uint8_t>(std::clamp(std::lround(c * 255.0), 0L, 255L));
}

Eigen::Vector3d albedo_linear(const Rgb8& c) {
  const auto& lut = srgb_to_linear_table();
  return {lut[c[0]], lut[c[1]], lut[c[2]]};
}

OrientedBox<double> box_primitive(const Box3d& b) {
  return {b.center(), 0.5 * b.sizes(), 0.0};
}

// Zero the coordinate along an axis-aligned normal so planar textures do not
// flicker across cell boundaries.
Vector3d planar_point(const Vector3d& p, const Vector3d& n) {
  Vector3d q = p;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(n[a]) > 0.5) q[a] = 0.0;
  }
  return q;
}

template <typename Fn>
void parallel_rows(int height, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, std::max(1, height));
  if (jobs == 1) {
    fn(0, height);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int j = 0; j < jobs; ++j) {
    const int begin = height * j / jobs;
    const int end = height * (j + 1) / jobs;
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

RenderSettings render_settings(const ImageProperties& image) {
  RenderSettings s;
  s.width = image.width;
  s.height = image.height;
  s.samples_per_pixel = image.samples_per_pixel;
  return s;
}

Primitive object_primitive(const SceneObject& o) {
  const double r = 0.5 * o.size;
  switch (o.shape) {
    case Shape::Cube:
      return OrientedBox<double>{o.position + Vector3d(0, 0, r), Vector3d::Constant(r), o.yaw};
    case Shape::Sphere:
      return Sphere<double>{o.position + Vector3d(0, 0, r), r};
    case Shape::Cone:
      return Cone<double>{o.position, r, o.size};
    case Shape::Cylinder:
      return Cylinder<double>{o.position, r, o.size};
  }
  return Sphere<double>{o.position, r};
}

std::optional<Hit<double>> intersect_primitive(const Ray<double>& ray, const Primitive& primitive) {
  return std::visit([&](const auto& p) { return intersect(ray, p); }, primitive);
}

Ray<double> camera_ray(const Camera& camera, int width, int height, double px, double py) {
  const Vector3d forward = (camera.look_at - camera.position).normalized();
  const Vector3d right = forward.cross(camera.up).normalized();
  const Vector3d up = right.cross(forward);
  const double tan_half = std::tan(0.5 * camera.fov_deg * std::numbers::pi / 180.0);
  const double aspect = static_cast<double>(width) / height;
  const double sx = (2.0 * px / width - 1.0) * tan_half * aspect;
  const double sy = (1.0 - 2.0 * py / height) * tan_half;
  return make_ray<double>(camera.position, forward + sx * right + sy * up);
}

SceneTracer::SceneTracer(const SceneGraph& scene)
    : scene_(&scene),
      room_(scene.room),
      floor_(parse_texture(scene.floor_texture)),
      wall_(parse_texture(scene.wall_texture)) {
  const Rgb8 table_color = parse_texture(scene.table.texture).primary.rgb;
  solids_.push_back({box_primitive(scene.table.top()), 0, table_color});
  for (const auto& leg : scene.table.legs()) {
    solids_.push_back({box_primitive(leg), 0, table_color});
  }
  for (const auto& o : scene.objects) {
    solids_.push_back({object_primitive(o), o.object_id, o.color.rgb});
  }
}

std::optional<SceneTracer::SurfaceHit> SceneTracer::nearest(const Ray<double>& ray) const {
  std::optional<SurfaceHit> best;
  for (const auto& solid : solids_) {
    const auto h = intersect_primitive(ray, solid.primitive);
    if (h && (!best || h->t < best->hit.t)) {
      best = SurfaceHit{*h, solid.instance_id, solid.albedo};
    }
  }
  const auto shell = intersect_interior(ray, room_);
  if (shell && (!best || shell->t < best->hit.t)) {
    const bool is_floor = shell->normal.z() > 0.5;
    const Texture& tex = is_floor ? floor_ : wall_;
    best = SurfaceHit{*shell, 0, tex.sample(planar_point(shell->point, shell->normal))};
  }
  return best;
}

bool SceneTracer::occluded(const Vector3d& from, const Vector3d& to) const {
  const Vector3d delta = to - from;
  const double dist = delta.norm();
  const Ray<double> ray{from, delta / dist};
  for (const auto& solid : solids_) {
    const auto h = intersect_primitive(ray, solid.primitive);
    if (h && h->t < dist - kShadowEpsilon) return true;
  }
  return false;
}

Eigen::Vector3d SceneTracer::shade(const Ray<double>& ray) const {
  const auto hit = nearest(ray);
  if (!hit) return Eigen::Vector3d::Zero();

  Vector3d n = hit->hit.normal;
  if (n.dot(ray.direction) > 0.0) n = -n;
  const Vector3d p = hit->hit.point + kShadowEpsilon * n;

  double irradiance = scene_->ambient;
  for (const auto& light : scene_->lights) {
    const Vector3d to_light = light.position - p;
    const double d2 = to_light.squaredNorm();
    const double cos_theta = n.dot(to_light) / std::sqrt(d2);
    if (cos_theta <= 0.0) continue;
    if (occluded(p, light.position)) continue;
    irradiance += light.strength * cos_theta / d2;
  }
  return albedo_linear(hit->albedo) * irradiance;
}

RenderOutput render(const SceneGraph& scene, int camera_index, const RenderSettings& settings,
                    int jobs) {
  if (camera_index < 0 || camera_index >= static_cast<int>(scene.cameras.size())) {
    throw std::out_of_range("render: camera index out of range");
  }
  const Camera& camera = scene.cameras[static_cast<std::size_t>(camera_index)];
  const SceneTracer tracer(scene);

  RenderOutput out;
  out.width = settings.width;
  out.height = settings.height;
  out.camera_index = camera_index;
  out.rgb.assign(out.pixel_count() * 3, 0);
  out.instances.assign(out.pixel_count(), 0);

  const int spp = std::max(1, settings.samples_per_pixel);
  const std::uint64_t view_seed = derive_seed(scene.rng_stream, 0x7e11de7, camera_index);

  parallel_rows(settings.height, jobs, [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < settings.width; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * settings.width + x;

        const auto center = tracer.nearest(camera_ray(camera, settings.width, settings.height,
                                                      x + 0.5, y + 0.5));
        out.instances[idx] = center ? static_cast<std::uint16_t>(center->instance_id) : 0;

        Rng rng(derive_seed(view_seed, idx));
        Eigen::Vector3d acc = Eigen::Vector3d::Zero();
        for (int s = 0; s < spp; ++s) {
          const double jx = rng.uniform();
          const double jy = rng.uniform();
          acc += tracer.shade(
              camera_ray(camera, settings.width, settings.height, x + jx, y + jy));
        }
        acc *= settings.exposure / spp;
        for (int c = 0; c < 3; ++c) {
          out.rgb[3 * idx + c] = linear_to_srgb8(acc[c]);
        }
      }
    }
  });
  return out;
}

std::vector<RenderOutput> render_scene_all_views(const SceneGraph& scene,
                                                 const RenderSettings& settings, int jobs) {
  std::vector<RenderOutput> outputs;
  outputs.reserve(scene.cameras.size());
  for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
    outputs.push_back(render(scene, static_cast<int>(c), settings, jobs));
  }
  return outputs;
}

std::vector<std::size_t> instance_pixel_counts(const RenderOutput& output, int max_id) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_id) + 1, 0);
  for (auto id : output.instances) {
    if (id <= max_id) ++counts[id];
  }
  return counts;
}

}  // namespace situate

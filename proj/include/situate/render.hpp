#pragma once

#include "situate/config.hpp"
#include "situate/geometry.hpp"
#include "situate/scene.hpp"
#include "situate/texture.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

namespace situate {

struct RenderSettings {
  int width = 1024;
  int height = 576;
  int samples_per_pixel = 16;
  double exposure = 1.0;
};

RenderSettings render_settings(const ImageProperties& image);

// Row-major buffers. rgb holds width*height sRGB triples; instances holds one
// object id per pixel (0 = room, table or nothing).
struct RenderOutput {
  int width = 0;
  int height = 0;
  int camera_index = 0;
  std::vector<std::uint8_t> rgb;
  std::vector<std::uint16_t> instances;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  Rgb8 pixel(std::size_t index) const { return {rgb[3 * index], rgb[3 * index + 1], rgb[3 * index + 2]}; }
  bool operator==(const RenderOutput&) const = default;
};

using Primitive = std::variant<Sphere<double>, OrientedBox<double>, Cone<double>, Cylinder<double>>;

Primitive object_primitive(const SceneObject& object);

std::optional<Hit<double>> intersect_primitive(const Ray<double>& ray, const Primitive& primitive);

// Primary ray through continuous pixel coordinates (x right, y down; the
// center of pixel (i, j) is (i + 0.5, j + 0.5)).
Ray<double> camera_ray(const Camera& camera, int width, int height, double px, double py);

// Scene flattened into primitives with materials, ready for tracing.
class SceneTracer {
 public:
  explicit SceneTracer(const SceneGraph& scene);

  struct SurfaceHit {
    Hit<double> hit;
    int instance_id = 0;
    Rgb8 albedo{};
  };

  std::optional<SurfaceHit> nearest(const Ray<double>& ray) const;
  // Linear radiance per channel.
  Eigen::Vector3d shade(const Ray<double>& ray) const;

 private:
  struct Solid {
    Primitive primitive;
    int instance_id;
    Rgb8 albedo;
  };

  bool occluded(const Vector3d& from, const Vector3d& to) const;

  const SceneGraph* scene_;
  std::vector<Solid> solids_;
  Box3d room_;
  Texture floor_;
  Texture wall_;
};

// Traces samples_per_pixel jittered rays per pixel for color and a single
// unjittered center ray for the instance map. Deterministic and
// independent of `jobs`.
RenderOutput render(const SceneGraph& scene, int camera_index, const RenderSettings& settings,
                    int jobs = 1);

std::vector<RenderOutput> render_scene_all_views(const SceneGraph& scene,
                                                 const RenderSettings& settings, int jobs = 1);

// Number of pixels labeled with each object id (index 0 = background).
std::vector<std::size_t> instance_pixel_counts(const RenderOutput& output, int max_id);

// PNG output: `path` receives the 8-bit RGB image, the instance map goes to
// the sibling `<stem>.seg.png` as 16-bit grayscale. Throws IoError.
void write_png(const RenderOutput& output, const std::filesystem::path& path);
std::filesystem::path segmentation_path(const std::filesystem::path& rgb_path);

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

void write_rgb_png(const std::filesystem::path& path, int width, int height,
                   std::span<const std::uint8_t> rgb);
void write_gray16_png(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> gray);
PngImage read_png(const std::filesystem::path& path);

}  // namespace situate

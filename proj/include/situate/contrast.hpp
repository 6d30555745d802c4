#pragma once

#include "situate/config.hpp"
#include "situate/render.hpp"
#include "situate/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace situate {

struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// sRGB (8-bit, D65) -> linear -> XYZ (2 degree observer) -> CIELAB.
LabColor srgb_to_lab(const Rgb8& c);

// CIE76: Euclidean distance in Lab.
double delta_e(const LabColor& x, const LabColor& y);

// An (object, view) pair passes when its contrast reaches the threshold.
inline bool contrast_passes(double delta_e_value, double threshold) {
  return delta_e_value >= threshold;
}

// Binary dilation with a (2r+1)x(2r+1) square structuring element.
std::vector<std::uint8_t> dilate_square(std::span<const std::uint8_t> mask, int width, int height,
                                        int radius);

enum class ContrastStatus : std::uint8_t { Ok, NotVisible, DegenerateRing };

struct ObjectContrast {
  ContrastStatus status = ContrastStatus::Ok;
  LabColor object_mean;
  LabColor background_mean;
  double delta_e = 0.0;
  std::size_t object_pixels = 0;
  std::size_t ring_pixels = 0;
};

// Object mask = pixels labeled object_id. Background ring = the mask dilated
// by `dilation_radius`, minus the mask, minus pixels of any other object.
// Means are taken over per-pixel Lab values.
ObjectContrast object_contrast(const RenderOutput& output, int object_id, int dilation_radius);

struct ContrastEntry {
  int object_id = 0;
  int camera_index = 0;
  LabColor object_mean;
  LabColor background_mean;
  double delta_e = 0.0;
  bool degenerate = false;
  bool pass = false;
};

struct ContrastReport {
  double threshold = 0.0;
  std::vector<ContrastEntry> entries;  // visible (object, view) pairs only
  bool overall_pass = false;
  int retries_used = 0;
};

ContrastReport evaluate_contrast(const SceneGraph& scene, std::span<const RenderOutput> outputs,
                                 const ValidationSettings& settings);

// Reassigns every object color and the floor/wall textures from the scene's
// material library. Geometry, shapes and zones are untouched. Object colors
// avoid the floor texture's primary color name when the palette allows it.
void repaint_scene(SceneGraph& scene, Rng& rng);

struct RepairResult {
  SceneGraph scene;
  std::vector<RenderOutput> outputs;
  ContrastReport report;
  bool accepted = false;
};

// Checks every visible (object, view) pair; on any failure repaints and
// re-renders all views, up to max_retries times. accepted == false means the
// scene must be resampled.
RepairResult validate_and_repair(SceneGraph scene, std::vector<RenderOutput> outputs,
                                 const ValidationSettings& validation,
                                 const RenderSettings& render_settings, int jobs = 1);

nlohmann::json contrast_report_to_json(const ContrastReport& report);

}  // namespace situate

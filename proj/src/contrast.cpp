#include "situate/contrast.hpp"

#include "situate/random.hpp"
#include "situate/texture.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace situate {

namespace {

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double decode(std::uint8_t v) {
  const double c = v / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

LabColor convert(const Rgb8& c) {
  const double r = decode(c[0]);
  const double g = decode(c[1]);
  const double b = decode(c[2]);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn);
  const double fy = lab_f(y / kYn);
  const double fz = lab_f(z / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct LabAccumulator {
  double L = 0.0, a = 0.0, b = 0.0;
  std::size_t n = 0;

  void add(const LabColor& c) {
    L += c.L;
    a += c.a;
    b += c.b;
    ++n;
  }
  LabColor mean() const {
    const double k = n ? 1.0 / static_cast<double>(n) : 0.0;
    return {L * k, a * k, b * k};
  }
};

nlohmann::json lab_json(const LabColor& c) { return nlohmann::json::array({c.L, c.a, c.b}); }

}  // namespace

LabColor srgb_to_lab(const Rgb8& c) { return convert(c); }

double delta_e(const LabColor& x, const LabColor& y) {
  const double dl = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

std::vector<std::uint8_t> dilate_square(std::span<const std::uint8_t> mask, int width, int height,
                                        int radius) {
  // Separable: a square max filter is a row max followed by a column max.
  // Each pass uses prefix counts of set pixels.
  std::vector<std::uint8_t> rows(mask.size(), 0);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(width, height)) + 1);
  for (int y = 0; y < height; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * width;
    prefix[0] = 0;
    for (int x = 0; x < width; ++x) prefix[x + 1] = prefix[x] + (mask[base + x] ? 1 : 0);
    for (int x = 0; x < width; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(width - 1, x + radius);
      rows[base + x] = prefix[hi + 1] - prefix[lo] > 0;
    }
  }
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int x = 0; x < width; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < height; ++y)
      prefix[y + 1] = prefix[y] + (rows[static_cast<std::size_t>(y) * width + x] ? 1 : 0);
    for (int y = 0; y < height; ++y) {
      const int lo = std::max(0, y - radius);
      const int hi = std::min(height - 1, y + radius);
      out[static_cast<std::size_t>(y) * width + x] = prefix[hi + 1] - prefix[lo] > 0;
    }
  }
  return out;
}

ObjectContrast object_contrast(const RenderOutput& output, int object_id, int dilation_radius) {
  const int w = output.width;
  const int h = output.height;

  // Work inside the object's bounding box grown by the radius.
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (output.instances[static_cast<std::size_t>(y) * w + x] == object_id) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  ObjectContrast result;
  if (x1 < 0) {
    result.status = ContrastStatus::NotVisible;
    return result;
  }
  x0 = std::max(0, x0 - dilation_radius);
  y0 = std::max(0, y0 - dilation_radius);
  x1 = std::min(w - 1, x1 + dilation_radius);
  y1 = std::min(h - 1, y1 + dilation_radius);
  const int ww = x1 - x0 + 1;
  const int wh = y1 - y0 + 1;

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(ww) * wh, 0);
  for (int y = 0; y < wh; ++y) {
    for (int x = 0; x < ww; ++x) {
      mask[static_cast<std::size_t>(y) * ww + x] =
          output.instances[static_cast<std::size_t>(y + y0) * w + (x + x0)] == object_id;
    }
  }
  const auto dilated = dilate_square(mask, ww, wh, dilation_radius);

  LabAccumulator obj;
  LabAccumulator ring;
  for (int y = 0; y < wh; ++y) {
    for (int x = 0; x < ww; ++x) {
      const std::size_t local = static_cast<std::size_t>(y) * ww + x;
      const std::size_t global = static_cast<std::size_t>(y + y0) * w + (x + x0);
      if (mask[local]) {
        obj.add(srgb_to_lab(output.pixel(global)));
      } else if (dilated[local] && output.instances[global] == 0) {
        ring.add(srgb_to_lab(output.pixel(global)));
      }
    }
  }
  result.object_pixels = obj.n;
  result.ring_pixels = ring.n;
  result.object_mean = obj.mean();
  if (ring.n == 0) {
    result.status = ContrastStatus::DegenerateRing;
    return result;
  }
  result.background_mean = ring.mean();
  result.delta_e = delta_e(result.object_mean, result.background_mean);
  return result;
}

ContrastReport evaluate_contrast(const SceneGraph& scene, std::span<const RenderOutput> outputs,
                                 const ValidationSettings& settings) {
  ContrastReport report;
  report.threshold = settings.delta_e_threshold;
  report.overall_pass = true;
  for (const auto& out : outputs) {
    for (const auto& obj : scene.objects) {
      const auto c = object_contrast(out, obj.object_id, settings.dilation_radius);
      if (c.status == ContrastStatus::NotVisible) continue;
      ContrastEntry e;
      e.object_id = obj.object_id;
      e.camera_index = out.camera_index;
      e.object_mean = c.object_mean;
      e.background_mean = c.background_mean;
      e.delta_e = c.delta_e;
      e.degenerate = c.status == ContrastStatus::DegenerateRing;
      e.pass = !e.degenerate && contrast_passes(c.delta_e, settings.delta_e_threshold);
      report.overall_pass = report.overall_pass && e.pass;
      report.entries.push_back(e);
    }
  }
  return report;
}

void repaint_scene(SceneGraph& scene, Rng& rng) {
  const auto& lib = scene.materials;
  if (!lib.floor_textures.empty()) {
    scene.floor_texture = lib.floor_textures[rng.index(lib.floor_textures.size())];
  }
  if (!lib.wall_textures.empty()) {
    scene.wall_texture = lib.wall_textures[rng.index(lib.wall_textures.size())];
  }
  if (lib.colors.empty()) return;

  const std::string floor_color = texture_primary_color(scene.floor_texture);
  std::vector<const NamedColor*> allowed;
  for (const auto& c : lib.colors) {
    if (c.name != floor_color) allowed.push_back(&c);
  }
  if (allowed.empty()) {
    for (const auto& c : lib.colors) allowed.push_back(&c);
  }
  for (auto& obj : scene.objects) {
    obj.color = *allowed[rng.index(allowed.size())];
  }
}

RepairResult validate_and_repair(SceneGraph scene, std::vector<RenderOutput> outputs,
                                 const ValidationSettings& validation,
                                 const RenderSettings& render_settings, int jobs) {
  RepairResult result;
  result.report = evaluate_contrast(scene, outputs, validation);
  int retries = 0;
  while (!result.report.overall_pass && retries < validation.max_retries) {
    ++retries;
    Rng rng(derive_seed(scene.rng_stream, 0x4e9a14, static_cast<std::uint64_t>(retries)));
    repaint_scene(scene, rng);
    outputs = render_scene_all_views(scene, render_settings, jobs);
    result.report = evaluate_contrast(scene, outputs, validation);
  }
  result.report.retries_used = retries;
  result.accepted = result.report.overall_pass;
  result.scene = std::move(scene);
  result.outputs = std::move(outputs);
  return result;
}

nlohmann::json contrast_report_to_json(const ContrastReport& report) {
  nlohmann::json j;
  j["threshold"] = report.threshold;
  j["overall_pass"] = report.overall_pass;
  j["retries_used"] = report.retries_used;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    j["entries"].push_back({{"object_id", e.object_id},
                            {"camera_index", e.camera_index},
                            {"object_lab", lab_json(e.object_mean)},
                            {"background_lab", lab_json(e.background_mean)},
                            {"delta_e", e.delta_e},
                            {"degenerate", e.degenerate},
                            {"pass", e.pass}});
  }
  return j;
}

}  // namespace situate

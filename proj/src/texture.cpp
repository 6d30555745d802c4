#include "situate/texture.hpp"

#include "situate/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace situate {

namespace {

const std::vector<NamedColor>& color_table() {
  static const std::vector<NamedColor> table{
      {"white", {235, 235, 230}},    {"cream", {240, 228, 200}},  {"beige", {214, 196, 160}},
      {"sand", {194, 170, 120}},     {"lightgray", {190, 190, 190}}, {"gray", {128, 128, 128}},
      {"darkgray", {70, 70, 72}},    {"slate", {96, 110, 125}},   {"brown", {110, 74, 45}},
      {"wood", {150, 105, 62}},      {"terracotta", {176, 96, 70}}, {"olive", {112, 118, 70}},
      {"sage", {150, 170, 140}},     {"teal", {50, 110, 115}},    {"navy", {40, 50, 90}},
      {"maroon", {110, 35, 40}},     {"black", {25, 25, 25}},
  };
  return table;
}

const NamedColor& find_color(std::string_view name, std::string_view texture_id) {
  const auto& table = color_table();
  const auto it = std::find_if(table.begin(), table.end(),
                               [&](const NamedColor& c) { return c.name == name; });
  if (it == table.end()) {
    throw ConfigError("unknown texture color '" + std::string(name) + "' in texture id '" +
                      std::string(texture_id) + "'");
  }
  return *it;
}

Rgb8 lerp(const Rgb8& a, const Rgb8& b, double t) {
  Rgb8 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = a[i] + (static_cast<double>(b[i]) - a[i]) * t;
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

double lattice_value(std::int64_t x, std::int64_t y, std::int64_t z) {
  const std::uint64_t h = derive_seed(static_cast<std::uint64_t>(x),
                                      static_cast<std::uint64_t>(y), static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(const Vector3d& p) {
  const double fx = std::floor(p.x());
  const double fy = std::floor(p.y());
  const double fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = smoothstep(p.x() - fx);
  const double ty = smoothstep(p.y() - fy);
  const double tz = smoothstep(p.z() - fz);

  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
        acc += w * lattice_value(ix + dx, iy + dy, iz + dz);
      }
    }
  }
  return acc;
}

}  // namespace

std::span<const NamedColor> texture_colors() { return color_table(); }

Texture parse_texture(std::string_view texture_id) {
  const auto colon = texture_id.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("malformed texture id '" + std::string(texture_id) +
                      "': expected <kind>:<color>[/<color>]");
  }
  const std::string_view kind = texture_id.substr(0, colon);
  const std::string_view colors = texture_id.substr(colon + 1);
  const auto slash = colors.find('/');

  Texture tex;
  if (kind == "solid") {
    tex.kind = TextureKind::Solid;
  } else if (kind == "checker") {
    tex.kind = TextureKind::Checker;
  } else if (kind == "stripes") {
    tex.kind = TextureKind::Stripes;
  } else if (kind == "noise") {
    tex.kind = TextureKind::ValueNoise;
  } else {
    throw ConfigError("unknown texture kind '" + std::string(kind) + "' in texture id '" +
                      std::string(texture_id) + "'");
  }

  if (tex.kind == TextureKind::Solid) {
    if (slash != std::string_view::npos) {
      throw ConfigError("solid texture takes one color: '" + std::string(texture_id) + "'");
    }
    tex.primary = find_color(colors, texture_id);
    tex.secondary = tex.primary;
  } else {
    if (slash == std::string_view::npos) {
      throw ConfigError("patterned texture needs two colors: '" + std::string(texture_id) + "'");
    }
    tex.primary = find_color(colors.substr(0, slash), texture_id);
    tex.secondary = find_color(colors.substr(slash + 1), texture_id);
  }
  return tex;
}

Rgb8 Texture::sample(const Vector3d& point) const {
  switch (kind) {
    case TextureKind::Solid:
      return primary.rgb;
    case TextureKind::Checker: {
      const auto parity = static_cast<std::int64_t>(std::floor(point.x())) +
                          static_cast<std::int64_t>(std::floor(point.y())) +
                          static_cast<std::int64_t>(std::floor(point.z()));
      return (parity & 1) == 0 ? primary.rgb : secondary.rgb;
    }
    case TextureKind::Stripes: {
      const auto band = static_cast<std::int64_t>(std::floor((point.x() + point.y()) / 0.5));
      return (band & 1) == 0 ? primary.rgb : secondary.rgb;
    }
    case TextureKind::ValueNoise: {
      const double n = value_noise(point / 0.5);
      // Bias toward the primary color so it stays the dominant hue.
      return lerp(primary.rgb, secondary.rgb, 0.6 * n);
    }
  }
  return primary.rgb;
}

Rgb8 procedural_texture(std::string_view texture_id, const Vector3d& point) {
  return parse_texture(texture_id).sample(point);
}

std::string texture_primary_color(std::string_view texture_id) {
  return parse_texture(texture_id).primary.name;
}

}  // namespace situate

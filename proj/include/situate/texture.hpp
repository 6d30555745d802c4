#pragma once

#include "situate/types.hpp"

#include <span>
#include <string>
#include <string_view>

namespace situate {

// Built-in procedural texture set. A texture id has the form
//   solid:<color>
//   checker:<color>/<color>   (1 m cells)
//   stripes:<color>/<color>   (0.5 m bands)
//   noise:<color>/<color>     (value noise, 0.5 m lattice)
// where colors are names from texture_colors().
enum class TextureKind : std::uint8_t { Solid, Checker, Stripes, ValueNoise };

struct Texture {
  TextureKind kind = TextureKind::Solid;
  NamedColor primary;
  NamedColor secondary;

  Rgb8 sample(const Vector3d& point) const;
};

std::span<const NamedColor> texture_colors();

// Throws ConfigError for unknown kinds or color names.
Texture parse_texture(std::string_view texture_id);

// Pure function of (texture_id, point). Callers evaluating points on an
// axis-aligned plane should zero the coordinate along the plane normal so
// the pattern does not flicker across cell boundaries.
Rgb8 procedural_texture(std::string_view texture_id, const Vector3d& point);

// Name of the dominant color, used to keep object colors off the floor color.
std::string texture_primary_color(std::string_view texture_id);

}  // namespace situate

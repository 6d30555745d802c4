#include "situate/types.hpp"

namespace situate {

std::string_view shape_name(Shape shape) {
  switch (shape) {
    case Shape::Cube: return "cube";
    case Shape::Sphere: return "sphere";
    case Shape::Cone: return "cone";
    case Shape::Cylinder: return "cylinder";
  }
  return "unknown";
}

std::string_view shape_plural(Shape shape) {
  switch (shape) {
    case Shape::Cube: return "cubes";
    case Shape::Sphere: return "spheres";
    case Shape::Cone: return "cones";
    case Shape::Cylinder: return "cylinders";
  }
  return "unknown";
}

std::optional<Shape> parse_shape(std::string_view name) {
  for (Shape s : kAllShapes) {
    if (shape_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view zone_name(Zone zone) {
  switch (zone) {
    case Zone::OnTable: return "on_table";
    case Zone::UnderTable: return "under_table";
    case Zone::LeftOfTable: return "left_of_table";
    case Zone::RightOfTable: return "right_of_table";
    case Zone::FrontOfTable: return "front_of_table";
  }
  return "unknown";
}

std::optional<Zone> parse_zone(std::string_view name) {
  for (Zone z : kAllZones) {
    if (zone_name(z) == name) return z;
  }
  if (name == "under") return Zone::UnderTable;
  if (name == "left") return Zone::LeftOfTable;
  if (name == "right") return Zone::RightOfTable;
  if (name == "front") return Zone::FrontOfTable;
  return std::nullopt;
}

}  // namespace situate

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace situate {

// Eigen vector types used throughout. Geometry is templated on the scalar;
// scene data is stored in double.
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Box3 = Eigen::AlignedBox<Scalar, 3>;

using Vector3d = Vector3<double>;
using Box3d = Box3<double>;

using Rgb8 = std::array<std::uint8_t, 3>;

enum class Shape : std::uint8_t { Cube, Sphere, Cone, Cylinder };
inline constexpr std::array<Shape, 4> kAllShapes{Shape::Cube, Shape::Sphere, Shape::Cone,
                                                 Shape::Cylinder};

// Order matters: verbose ground truths list zones in this order.
enum class Zone : std::uint8_t { OnTable, UnderTable, LeftOfTable, RightOfTable, FrontOfTable };
inline constexpr std::array<Zone, 5> kAllZones{Zone::OnTable, Zone::UnderTable, Zone::LeftOfTable,
                                               Zone::RightOfTable, Zone::FrontOfTable};

std::string_view shape_name(Shape shape);
std::string_view shape_plural(Shape shape);
std::optional<Shape> parse_shape(std::string_view name);

std::string_view zone_name(Zone zone);
// Accepts the canonical names and the short aliases "under", "left", "right", "front".
std::optional<Zone> parse_zone(std::string_view name);

struct NamedColor {
  std::string name;
  Rgb8 rgb{};

  friend bool operator==(const NamedColor&, const NamedColor&) = default;
};

// Error hierarchy. Each maps to a distinct CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace situate

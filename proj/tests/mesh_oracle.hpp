#pragma once

// Brute-force triangle-mesh intersector used as an independent oracle for the
// analytic primitives.

#include "situate/geometry.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace situate::testing {

struct Triangle {
  Vector3d a, b, c;
  Vector3d centroid;
  double radius;  // bounding sphere about the centroid
};

class TriangleMesh {
 public:
  void add(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
    const Vector3d g = (a + b + c) / 3.0;
    const double r = std::max({(a - g).norm(), (b - g).norm(), (c - g).norm()});
    tris_.push_back({a, b, c, g, r});
  }

  // Nearest t > t_min, Moller-Trumbore.
  std::optional<double> intersect(const Ray<double>& ray, double t_min = 1e-9) const {
    std::optional<double> best;
    for (const auto& tri : tris_) {
      const Vector3d oc = tri.centroid - ray.origin;
      const double along = oc.dot(ray.direction);
      if ((oc - along * ray.direction).squaredNorm() > tri.radius * tri.radius) continue;
      const Vector3d e1 = tri.b - tri.a;
      const Vector3d e2 = tri.c - tri.a;
      const Vector3d p = ray.direction.cross(e2);
      const double det = e1.dot(p);
      if (std::abs(det) < 1e-14) continue;
      const double inv = 1.0 / det;
      const Vector3d s = ray.origin - tri.a;
      const double u = s.dot(p) * inv;
      if (u < 0.0 || u > 1.0) continue;
      const Vector3d q = s.cross(e1);
      const double v = ray.direction.dot(q) * inv;
      if (v < 0.0 || u + v > 1.0) continue;
      const double t = e2.dot(q) * inv;
      if (t > t_min && (!best || t < *best)) best = t;
    }
    return best;
  }

  std::size_t size() const { return tris_.size(); }

 private:
  std::vector<Triangle> tris_;
};

inline Vector3d on_circle(const Vector3d& center, double r, double angle, double z) {
  return {center.x() + r * std::cos(angle), center.y() + r * std::sin(angle), center.z() + z};
}

inline TriangleMesh tessellate(const Sphere<double>& s, int stacks = 256, int slices = 512) {
  TriangleMesh mesh;
  auto point = [&](int i, int j) {
    const double theta = std::numbers::pi * i / stacks;
    const double phi = 2.0 * std::numbers::pi * j / slices;
    return Vector3d(s.center + s.radius * Vector3d(std::sin(theta) * std::cos(phi),
                                                   std::sin(theta) * std::sin(phi),
                                                   std::cos(theta)));
  };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      const auto p00 = point(i, j), p01 = point(i, j + 1);
      const auto p10 = point(i + 1, j), p11 = point(i + 1, j + 1);
      if (i != 0) mesh.add(p00, p10, p01);
      if (i + 1 != stacks) mesh.add(p01, p10, p11);
    }
  }
  return mesh;
}

inline TriangleMesh tessellate(const OrientedBox<double>& box) {
  TriangleMesh mesh;
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  auto corner = [&](int sx, int sy, int sz) {
    const Vector3d l(sx * box.half_extents.x(), sy * box.half_extents.y(), sz * box.half_extents.z());
    return Vector3d(box.center + Vector3d(c * l.x() - s * l.y(), s * l.x() + c * l.y(), l.z()));
  };
  const int f[6][4][3] = {
      {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1}}, {{-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}},
      {{-1, -1, -1}, {1, -1, -1}, {1, -1, 1}, {-1, -1, 1}}, {{-1, 1, -1}, {1, 1, -1}, {1, 1, 1}, {-1, 1, 1}},
      {{-1, -1, -1}, {-1, 1, -1}, {-1, 1, 1}, {-1, -1, 1}}, {{1, -1, -1}, {1, 1, -1}, {1, 1, 1}, {1, -1, 1}}};
  for (const auto& face : f) {
    const auto a = corner(face[0][0], face[0][1], face[0][2]);
    const auto b = corner(face[1][0], face[1][1], face[1][2]);
    const auto cc = corner(face[2][0], face[2][1], face[2][2]);
    const auto d = corner(face[3][0], face[3][1], face[3][2]);
    mesh.add(a, b, cc);
    mesh.add(a, cc, d);
  }
  return mesh;
}

inline TriangleMesh tessellate(const Cylinder<double>& cyl, int slices = 2048) {
  TriangleMesh mesh;
  const Vector3d top = cyl.base_center + Vector3d(0, 0, cyl.height);
  for (int j = 0; j < slices; ++j) {
    const double a0 = 2.0 * std::numbers::pi * j / slices;
    const double a1 = 2.0 * std::numbers::pi * (j + 1) / slices;
    const auto b0 = on_circle(cyl.base_center, cyl.radius, a0, 0);
    const auto b1 = on_circle(cyl.base_center, cyl.radius, a1, 0);
    const auto t0 = on_circle(cyl.base_center, cyl.radius, a0, cyl.height);
    const auto t1 = on_circle(cyl.base_center, cyl.radius, a1, cyl.height);
    mesh.add(b0, b1, t1);
    mesh.add(b0, t1, t0);
    mesh.add(cyl.base_center, b0, b1);
    mesh.add(top, t0, t1);
  }
  return mesh;
}

inline TriangleMesh tessellate(const Cone<double>& cone, int slices = 2048, int rings = 64) {
  TriangleMesh mesh;
  for (int j = 0; j < slices; ++j) {
    const double a0 = 2.0 * std::numbers::pi * j / slices;
    const double a1 = 2.0 * std::numbers::pi * (j + 1) / slices;
    mesh.add(cone.base_center, on_circle(cone.base_center, cone.radius, a0, 0),
             on_circle(cone.base_center, cone.radius, a1, 0));
    // The lateral surface is ruled, so flat quads between rings are exact
    // up to the angular chord error.
    for (int k = 0; k < rings; ++k) {
      const double f0 = static_cast<double>(k) / rings;
      const double f1 = static_cast<double>(k + 1) / rings;
      const auto p00 = on_circle(cone.base_center, cone.radius * (1 - f0), a0, cone.height * f0);
      const auto p01 = on_circle(cone.base_center, cone.radius * (1 - f0), a1, cone.height * f0);
      const auto p10 = on_circle(cone.base_center, cone.radius * (1 - f1), a0, cone.height * f1);
      const auto p11 = on_circle(cone.base_center, cone.radius * (1 - f1), a1, cone.height * f1);
      mesh.add(p00, p01, p11);
      if (k + 1 != rings) mesh.add(p00, p11, p10);
    }
  }
  return mesh;
}

// The primitive grown or shrunk about its center/base by `factor`.
inline Sphere<double> scaled(const Sphere<double>& s, double f) { return {s.center, s.radius * f}; }
inline OrientedBox<double> scaled(const OrientedBox<double>& b, double f) {
  return {b.center, b.half_extents * f, b.yaw};
}
inline Cylinder<double> scaled(const Cylinder<double>& c, double f) {
  const double dh = c.height * (f - 1) / 2;
  return {c.base_center - Vector3d(0, 0, dh), c.radius * f, c.height * f};
}
inline Cone<double> scaled(const Cone<double>& c, double f) {
  const double dh = c.height * (f - 1) / 4;  // scale about the centroid height
  return {c.base_center - Vector3d(0, 0, dh), c.radius * f, c.height * f};
}

}  // namespace situate::testing

#pragma once

#include "situate/types.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace situate {

template <typename Scalar>
struct Ray {
  Vector3<Scalar> origin;
  Vector3<Scalar> direction;  // unit length

  Vector3<Scalar> at(Scalar t) const { return origin + t * direction; }
};

template <typename Scalar>
Ray<Scalar> make_ray(const Vector3<Scalar>& origin, const Vector3<Scalar>& direction) {
  return {origin, direction.normalized()};
}

template <typename Scalar>
struct Hit {
  Scalar t;
  Vector3<Scalar> point;
  Vector3<Scalar> normal;  // unit, outward for solids, inward for the room shell
};

template <typename Scalar>
inline constexpr Scalar kRayEpsilon = Scalar(1e-7);

// Analytic primitives. Cones and cylinders stand upright on their base
// (axis = +z); boxes may be rotated about z by `yaw` radians.
template <typename Scalar>
struct Sphere {
  Vector3<Scalar> center;
  Scalar radius;
};

template <typename Scalar>
struct OrientedBox {
  Vector3<Scalar> center;
  Vector3<Scalar> half_extents;
  Scalar yaw = Scalar(0);
};

template <typename Scalar>
struct Cone {
  Vector3<Scalar> base_center;
  Scalar radius;
  Scalar height;
};

template <typename Scalar>
struct Cylinder {
  Vector3<Scalar> base_center;
  Scalar radius;
  Scalar height;
};

namespace detail {

template <typename Scalar>
void keep_nearest(std::optional<Hit<Scalar>>& best, Scalar t, const Vector3<Scalar>& point,
                  const Vector3<Scalar>& normal) {
  if (!best || t < best->t) {
    best = Hit<Scalar>{t, point, normal};
  }
}

// Real roots of a t^2 + b t + c = 0 in ascending order. Degenerates to the
// linear case when a is ~0.
template <typename Scalar>
int solve_quadratic(Scalar a, Scalar b, Scalar c, Scalar& t0, Scalar& t1) {
  const Scalar scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == Scalar(0)) {
    return 0;
  }
  if (std::abs(a) <= Scalar(1e-12) * scale) {
    if (b == Scalar(0)) {
      return 0;
    }
    t0 = t1 = -c / b;
    return 1;
  }
  const Scalar disc = b * b - Scalar(4) * a * c;
  if (disc < Scalar(0)) {
    return 0;
  }
  // Numerically stable form.
  const Scalar sq = std::sqrt(disc);
  const Scalar q = b < Scalar(0) ? Scalar(-0.5) * (b - sq) : Scalar(-0.5) * (b + sq);
  Scalar r0 = q / a;
  Scalar r1 = q != Scalar(0) ? c / q : r0;
  if (r0 > r1) {
    std::swap(r0, r1);
  }
  t0 = r0;
  t1 = r1;
  return 2;
}

}  // namespace detail

template <typename Scalar>
std::optional<Hit<Scalar>> intersect(const Ray<Scalar>& ray, const Sphere<Scalar>& s,
                                     Scalar t_min = kRayEpsilon<Scalar>) {
  const Vector3<Scalar> oc = ray.origin - s.center;
  const Scalar b = Scalar(2) * oc.dot(ray.direction);
  const Scalar c = oc.squaredNorm() - s.radius * s.radius;
  Scalar t0, t1;
  if (detail::solve_quadratic(ray.direction.squaredNorm(), b, c, t0, t1) == 0) {
    return std::nullopt;
  }
  for (Scalar t : {t0, t1}) {
    if (t > t_min) {
      const Vector3<Scalar> p = ray.at(t);
      return Hit<Scalar>{t, p, (p - s.center).normalized()};
    }
  }
  return std::nullopt;
}

template <typename Scalar>
std::optional<Hit<Scalar>> intersect(const Ray<Scalar>& ray, const OrientedBox<Scalar>& box,
                                     Scalar t_min = kRayEpsilon<Scalar>) {
  // Work in the box frame: rotate by -yaw about z.
  const Scalar c = std::cos(box.yaw);
  const Scalar s = std::sin(box.yaw);
  const Vector3<Scalar> rel = ray.origin - box.center;
  const Vector3<Scalar> o(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(), rel.z());
  const Vector3<Scalar> d(c * ray.direction.x() + s * ray.direction.y(),
                          -s * ray.direction.x() + c * ray.direction.y(), ray.direction.z());

  Scalar t_near = -std::numeric_limits<Scalar>::infinity();
  Scalar t_far = std::numeric_limits<Scalar>::infinity();
  int near_axis = -1;
  int far_axis = -1;
  for (int a = 0; a < 3; ++a) {
    const Scalar h = box.half_extents[a];
    if (std::abs(d[a]) < std::numeric_limits<Scalar>::min()) {
      if (o[a] < -h || o[a] > h) {
        return std::nullopt;
      }
      continue;
    }
    Scalar t0 = (-h - o[a]) / d[a];
    Scalar t1 = (h - o[a]) / d[a];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
    }
    if (t1 < t_far) {
      t_far = t1;
      far_axis = a;
    }
    if (t_near > t_far) {
      return std::nullopt;
    }
  }

  Scalar t;
  int axis;
  if (t_near > t_min) {
    t = t_near;
    axis = near_axis;
  } else if (t_far > t_min) {
    t = t_far;
    axis = far_axis;
  } else {
    return std::nullopt;
  }
  if (axis < 0) {
    return std::nullopt;
  }
  Vector3<Scalar> local_n = Vector3<Scalar>::Zero();
  local_n[axis] = (o[axis] + t * d[axis]) > Scalar(0) ? Scalar(1) : Scalar(-1);
  const Vector3<Scalar> n(c * local_n.x() - s * local_n.y(), s * local_n.x() + c * local_n.y(),
                          local_n.z());
  return Hit<Scalar>{t, ray.at(t), n};
}

template <typename Scalar>
std::optional<Hit<Scalar>> intersect(const Ray<Scalar>& ray, const Cylinder<Scalar>& cyl,
                                     Scalar t_min = kRayEpsilon<Scalar>) {
  const Vector3<Scalar> o = ray.origin - cyl.base_center;
  const Vector3<Scalar>& d = ray.direction;
  const Scalar r2 = cyl.radius * cyl.radius;
  std::optional<Hit<Scalar>> best;

  Scalar t0, t1;
  const int n = detail::solve_quadratic(d.x() * d.x() + d.y() * d.y(),
                                        Scalar(2) * (o.x() * d.x() + o.y() * d.y()),
                                        o.x() * o.x() + o.y() * o.y() - r2, t0, t1);
  for (int i = 0; i < n; ++i) {
    const Scalar t = i == 0 ? t0 : t1;
    if (t <= t_min) continue;
    const Scalar z = o.z() + t * d.z();
    if (z < Scalar(0) || z > cyl.height) continue;
    const Vector3<Scalar> p = ray.at(t);
    const Vector3<Scalar> local = p - cyl.base_center;
    detail::keep_nearest(best, t, p, Vector3<Scalar>(local.x(), local.y(), 0).normalized());
  }

  if (d.z() != Scalar(0)) {
    for (Scalar cap_z : {Scalar(0), cyl.height}) {
      const Scalar t = (cap_z - o.z()) / d.z();
      if (t <= t_min) continue;
      const Scalar x = o.x() + t * d.x();
      const Scalar y = o.y() + t * d.y();
      if (x * x + y * y > r2) continue;
      detail::keep_nearest(best, t, ray.at(t),
                           Vector3<Scalar>(0, 0, cap_z == Scalar(0) ? -1 : 1));
    }
  }
  return best;
}

template <typename Scalar>
std::optional<Hit<Scalar>> intersect(const Ray<Scalar>& ray, const Cone<Scalar>& cone,
                                     Scalar t_min = kRayEpsilon<Scalar>) {
  const Vector3<Scalar> o = ray.origin - cone.base_center;
  const Vector3<Scalar>& d = ray.direction;
  const Scalar k = cone.radius / cone.height;
  const Scalar k2 = k * k;
  const Scalar h_rel = cone.height - o.z();
  std::optional<Hit<Scalar>> best;

  // x^2 + y^2 = k^2 (height - z)^2 with 0 <= z <= height.
  Scalar t0, t1;
  const int n = detail::solve_quadratic(
      d.x() * d.x() + d.y() * d.y() - k2 * d.z() * d.z(),
      Scalar(2) * (o.x() * d.x() + o.y() * d.y() + k2 * h_rel * d.z()),
      o.x() * o.x() + o.y() * o.y() - k2 * h_rel * h_rel, t0, t1);
  for (int i = 0; i < n; ++i) {
    const Scalar t = i == 0 ? t0 : t1;
    if (t <= t_min) continue;
    const Scalar z = o.z() + t * d.z();
    if (z < Scalar(0) || z > cone.height) continue;
    const Vector3<Scalar> p = ray.at(t);
    const Vector3<Scalar> local = p - cone.base_center;
    Vector3<Scalar> normal(local.x(), local.y(), k2 * (cone.height - local.z()));
    const Scalar len = normal.norm();
    normal = len > Scalar(0) ? Vector3<Scalar>(normal / len) : Vector3<Scalar>(0, 0, 1);
    detail::keep_nearest(best, t, p, normal);
  }

  if (d.z() != Scalar(0)) {
    const Scalar t = -o.z() / d.z();
    if (t > t_min) {
      const Scalar x = o.x() + t * d.x();
      const Scalar y = o.y() + t * d.y();
      if (x * x + y * y <= cone.radius * cone.radius) {
        detail::keep_nearest(best, t, ray.at(t), Vector3<Scalar>(0, 0, -1));
      }
    }
  }
  return best;
}

// Hit on the inside of an axis-aligned box (the room shell). Normal points
// into the box.
template <typename Scalar>
std::optional<Hit<Scalar>> intersect_interior(const Ray<Scalar>& ray, const Box3<Scalar>& box,
                                              Scalar t_min = kRayEpsilon<Scalar>) {
  Scalar t_exit = std::numeric_limits<Scalar>::infinity();
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    const Scalar d = ray.direction[a];
    if (d == Scalar(0)) continue;
    const Scalar bound = d > Scalar(0) ? box.max()[a] : box.min()[a];
    const Scalar t = (bound - ray.origin[a]) / d;
    if (t < t_exit) {
      t_exit = t;
      axis = a;
    }
  }
  if (axis < 0 || !(t_exit > t_min)) {
    return std::nullopt;
  }
  Vector3<Scalar> n = Vector3<Scalar>::Zero();
  n[axis] = ray.direction[axis] > Scalar(0) ? Scalar(-1) : Scalar(1);
  return Hit<Scalar>{t_exit, ray.at(t_exit), n};
}

}  // namespace situate

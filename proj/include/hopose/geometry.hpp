// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "hopose/errors.hpp"

namespace hopose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

bool all_finite(const Vec2 &v);
bool all_finite(const Vec3 &v);

// Proper rotation (orthonormal, det +1). Construction validates, so a
// Rotation3 can be trusted downstream.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}

  // Checks orthonormality and determinant to 1e-9.
  static Rotation3 from_matrix(const Mat3 &m);

  // Rodrigues map. Zero vector gives the identity.
  static Rotation3 from_axis_angle(const Vec3 &aa);

  // Nearest rotation in Frobenius norm (SVD projection, det forced to +1).
  static Rotation3 project_nearest(const Mat3 &m);

  Vec3 to_axis_angle() const;

  const Mat3 &matrix() const { return m_; }
  Vec3 apply(const Vec3 &p) const { return m_ * p; }
  Rotation3 inverse() const;
  Rotation3 operator*(const Rotation3 &rhs) const;

  // Geodesic distance to another rotation, radians in [0, pi].
  double angle_to(const Rotation3 &other) const;

 private:
  explicit Rotation3(const Mat3 &m) : m_(m) {}
  Mat3 m_;
};

// x -> s * x_xy + t. Scale is kept strictly positive.
struct WeakPerspectiveCamera {
  double s = 1.0;
  Vec2 t = Vec2::Zero();

  WeakPerspectiveCamera() = default;
  WeakPerspectiveCamera(double scale, const Vec2 &trans);

  Vec2 project(const Vec3 &p) const { return s * p.head<2>() + t; }
};

// Pinhole intrinsics. No distortion model.
struct PerspectiveCamera {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;

  PerspectiveCamera() = default;
  PerspectiveCamera(double fx_, double fy_, double cx_, double cy_);

  Vec2 project(const Vec3 &p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

// Rigid transform, p_cam = R * p + t.
struct Pose6Dof {
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3 &p) const {
    return rotation.apply(p) + translation;
  }
};

// Axis-aligned box, min <= max component-wise (zero area allowed).
struct Box2 {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  Box2() = default;
  Box2(const Vec2 &mn, const Vec2 &mx);

  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
  double area() const { return width() * height(); }
  double diagonal() const { return (max - min).norm(); }
  bool operator==(const Box2 &o) const {
    return min == o.min && max == o.max;
  }
};

// p -> scale * R * p + t.
struct SimilarityTransform {
  double scale = 1.0;
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3 &p) const {
    return scale * rotation.apply(p) + translation;
  }
};

// PnP breakdown carries the best pose so far; see solve_pnp.
class PnpNotConverged : public NotConverged {
 public:
  PnpNotConverged(const std::string &msg, const Pose6Dof &best, double residual)
      : NotConverged(msg, residual), best_pose_(best) {}
  const Pose6Dof &best_pose() const { return best_pose_; }

 private:
  Pose6Dof best_pose_;
};

std::vector<Vec2> project_weak(const WeakPerspectiveCamera &cam,
                               const std::vector<Vec3> &points);

// Least-squares fit of scale + 2D translation mapping the xy part of j3d
// onto j2d. Closed form: s is the ratio of centered cross- and
// auto-correlations, t the residual mean. Throws DegenerateConfiguration
// when the xy spread of j3d is below 1e-12; s is floored at 1e-8.
WeakPerspectiveCamera fit_weak_camera(const std::vector<Vec3> &j3d,
                                      const std::vector<Vec2> &j2d);

// DLT initialization (needs >= 6 non-coplanar points) followed by
// Gauss-Newton on the reprojection error. Pass a prior to skip the DLT,
// which also lowers the requirement to 4 points. Iterates until the
// squared-error decrease drops under 1e-10 or 100 iterations; step halving
// keeps the residual non-increasing. Throws DegenerateConfiguration for
// unusable geometry and PnpNotConverged on numerical breakdown.
Pose6Dof solve_pnp(const std::vector<Vec3> &pts3d,
                   const std::vector<Vec2> &pts2d,
                   const PerspectiveCamera &cam,
                   const std::optional<Pose6Dof> &prior = std::nullopt);

// Mean squared reprojection error of a pose, in px^2.
double reprojection_error(const Pose6Dof &pose,
                          const std::vector<Vec3> &pts3d,
                          const std::vector<Vec2> &pts2d,
                          const PerspectiveCamera &cam);

// Closed-form similarity alignment (scale, rotation, translation) of pred
// onto gt minimizing the sum of squared distances. Reflections are
// rejected: the returned rotation always has det +1. Throws
// DegenerateConfiguration when either cloud has (near-)zero variance.
std::pair<std::vector<Vec3>, SimilarityTransform> procrustes_align(
    const std::vector<Vec3> &pred, const std::vector<Vec3> &gt);

// Intersection over union. Disjoint -> 0, identical -> 1.
double iou(const Box2 &a, const Box2 &b);

Box2 bbox_of_points(const std::vector<Vec2> &points);

}  // namespace hopose

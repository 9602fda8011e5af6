// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "hopose/geometry.hpp"

namespace hopose {

// 21-joint hand skeleton: wrist (0) plus MCP/PIP/DIP/TIP chains for
// thumb, index, middle, ring, little. 16 joints carry rotations (wrist
// and everything except the tips).
inline constexpr int kNumJoints = 21;
inline constexpr int kNumBones = 20;
inline constexpr int kNumArticulated = 16;
inline constexpr int kThetaDim = 3 * kNumArticulated;  // 48
inline constexpr int kBetaDim = 10;
inline constexpr int kNumFingers = 5;
inline constexpr int kMiddleMcp = 9;  // normalizer bone wrist -> middle MCP

inline constexpr std::array<int, kNumJoints> kParents = {
    -1, 0, 1, 2, 3, 0, 5, 6, 7, 0, 9, 10, 11, 0, 13, 14, 15, 0, 17, 18, 19};

// theta joint index -> skeleton joint (tips are not articulated).
inline constexpr std::array<int, kNumArticulated> kArticulated = {
    0, 1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15, 17, 18, 19};

struct HandParams {
  Eigen::Matrix<double, kThetaDim, 1> theta = Eigen::Matrix<double, kThetaDim, 1>::Zero();
  Eigen::Matrix<double, kBetaDim, 1> beta = Eigen::Matrix<double, kBetaDim, 1>::Zero();

  // Finite, and every per-joint axis-angle below 2*pi.
  void validate() const;

  Vec3 joint_rotation(int theta_joint) const {
    return theta.segment<3>(3 * theta_joint);
  }
};

// Rest skeleton, linear shape space and a low-poly skinned mesh. Rest
// wrist sits at the origin, so outputs are root-relative by construction.
struct HandTemplate {
  std::vector<Vec3> rest_joints;                   // 21
  std::array<int, kNumJoints> parents = kParents;
  std::array<int, kNumArticulated> articulated = kArticulated;
  std::vector<std::array<Vec3, kBetaDim>> shape_dirs;       // 21 x 10
  std::vector<Vec3> mesh_rest;                              // V >= 64
  Eigen::MatrixXd skin_weights;                             // V x 21, rows convex
  std::vector<std::array<Vec3, kBetaDim>> mesh_shape_dirs;  // V x 10

  int vertex_count() const { return static_cast<int>(mesh_rest.size()); }

  // Tree rooted at the wrist, positive rest bone lengths, convex skin
  // weight rows (sum 1 within 1e-9), finite everywhere.
  void validate() const;

  // Built-in hand: straight finger rays from the wrist, 6 mesh vertices
  // per bone (120 total).
  static HandTemplate standard();
};

struct HandOutput {
  std::vector<Vec3> joints3d;  // 21
  std::vector<Vec3> vertices;  // V
};

// Shape blend only: rest_joints + sum_k beta_k * shape_dirs[:,k].
std::vector<Vec3> shaped_rest_joints(const HandTemplate &tpl,
                                     const Eigen::Matrix<double, kBetaDim, 1> &beta);

// Forward kinematics + linear blend skinning. Joint rotations are applied
// about the shaped rest positions, composed root to leaf; vertices blend
// the per-joint world transforms with the skinning weights.
HandOutput forward_kinematics(const HandTemplate &tpl, const HandParams &params);

// One length per non-root joint, indexed by child joint - 1.
std::vector<double> bone_lengths(const std::vector<Vec3> &joints,
                                 const std::array<int, kNumJoints> &parents = kParents);

// Lengths divided by the wrist -> middle-MCP distance. Throws
// DegenerateConfiguration when the normalizer collapses (< 1e-9).
std::vector<double> normalized_bone_lengths(
    const std::vector<Vec3> &joints,
    const std::array<int, kNumJoints> &parents = kParents);

// Bending angle in degrees at every joint that has a parent and exactly
// one child: angle between (parent -> joint) and (joint -> child). 15
// values for the canonical skeleton. Zero-length bones throw.
std::vector<double> joint_flexion_angles(
    const std::vector<Vec3> &joints,
    const std::array<int, kNumJoints> &parents = kParents);

// Layout of the built-in template, exposed for pose synthesis: ray
// direction of a finger chain and the matching flexion hinge axis
// (perpendicular to the ray, in the palm plane).
Vec3 standard_finger_direction(int finger);
Vec3 standard_flexion_axis(int finger);

}  // namespace hopose

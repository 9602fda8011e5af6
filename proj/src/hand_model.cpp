// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/hand_model.hpp"

#include <cmath>
#include <numbers>

namespace hopose {

namespace {

// Straight rays from the wrist, palm in the xy plane, thumb tilted out
// of it. Distances along the ray are MCP/PIP/DIP/TIP in mm.
const std::array<Vec3, kNumFingers> kFingerDirs = {
    Vec3(0.75, 0.52, 0.25).normalized(),   // thumb
    Vec3(0.28, 0.96, 0.0).normalized(),    // index
    Vec3(0.0, 1.0, 0.0),                   // middle
    Vec3(-0.22, 0.97, 0.0).normalized(),   // ring
    Vec3(-0.45, 0.88, 0.0).normalized(),   // little
};

constexpr std::array<std::array<double, 4>, kNumFingers> kRadii = {{
    {45.0, 83.0, 113.0, 140.0},
    {92.0, 137.0, 164.0, 186.0},
    {95.0, 143.0, 172.0, 196.0},
    {88.0, 133.0, 160.0, 181.0},
    {80.0, 116.0, 138.0, 156.0},
}};

int finger_of(int joint) { return (joint - 1) / 4; }
int knuckle_of(int joint) { return (joint - 1) % 4; }  // 0=MCP .. 3=TIP

}  // namespace

Vec3 standard_finger_direction(int finger) { return kFingerDirs.at(finger); }

Vec3 standard_flexion_axis(int finger) {
  return kFingerDirs.at(finger).cross(Vec3::UnitZ()).normalized();
}

void HandParams::validate() const {
  if (!theta.allFinite() || !beta.allFinite()) {
    throw DimensionMismatch("hand params: non-finite value");
  }
  for (int j = 0; j < kNumArticulated; ++j) {
    if (joint_rotation(j).norm() >= 2.0 * std::numbers::pi) {
      throw DegenerateConfiguration("hand params: axis-angle magnitude of joint " +
                                    std::to_string(j) + " exceeds 2*pi");
    }
  }
}

void HandTemplate::validate() const {
  if (rest_joints.size() != kNumJoints || shape_dirs.size() != kNumJoints) {
    throw DimensionMismatch("hand template: joint table must have 21 entries");
  }
  if (parents[0] != -1) throw DimensionMismatch("hand template: joint 0 must be the root");
  for (int j = 1; j < kNumJoints; ++j) {
    int hops = 0, k = j;
    while (k != 0) {
      k = parents[k];
      if (k < 0 || k >= kNumJoints || ++hops > kNumJoints) {
        throw DimensionMismatch("hand template: parents do not form a tree");
      }
    }
    if ((rest_joints[j] - rest_joints[parents[j]]).norm() <= 0.0) {
      throw DegenerateConfiguration("hand template: zero-length rest bone at joint " +
                                    std::to_string(j));
    }
  }
  for (const auto &p : rest_joints) {
    if (!all_finite(p)) throw DimensionMismatch("hand template: non-finite rest joint");
  }
  const int v = vertex_count();
  if (v < 64) throw DimensionMismatch("hand template: mesh needs at least 64 vertices");
  if (static_cast<int>(mesh_shape_dirs.size()) != v ||
      skin_weights.rows() != v || skin_weights.cols() != kNumJoints) {
    throw DimensionMismatch("hand template: mesh table sizes disagree");
  }
  if (!skin_weights.allFinite() || skin_weights.minCoeff() < 0.0) {
    throw DimensionMismatch("hand template: skin weights must be non-negative");
  }
  for (int i = 0; i < v; ++i) {
    if (std::abs(skin_weights.row(i).sum() - 1.0) > 1e-9) {
      throw DimensionMismatch("hand template: skin weight row " + std::to_string(i) +
                              " does not sum to 1");
    }
    if (!all_finite(mesh_rest[i])) {
      throw DimensionMismatch("hand template: non-finite mesh vertex");
    }
  }
  for (const auto &dirs : shape_dirs) {
    for (const auto &d : dirs) {
      if (!all_finite(d)) throw DimensionMismatch("hand template: non-finite shape dir");
    }
  }
  for (const auto &dirs : mesh_shape_dirs) {
    for (const auto &d : dirs) {
      if (!all_finite(d)) throw DimensionMismatch("hand template: non-finite shape dir");
    }
  }
}

HandTemplate HandTemplate::standard() {
  HandTemplate tpl;
  tpl.rest_joints.assign(kNumJoints, Vec3::Zero());
  for (int f = 0; f < kNumFingers; ++f) {
    for (int k = 0; k < 4; ++k) {
      tpl.rest_joints[1 + 4 * f + k] = kRadii[f][k] * kFingerDirs[f];
    }
  }

  // Shape space. Component meaning, one direction set per beta entry:
  //   0 overall size, 1 finger length, 2 thumb length, 3 palm length,
  //   4 finger spread, 5 palm width; 6..9 act on the mesh only.
  tpl.shape_dirs.assign(kNumJoints, {});
  for (int j = 1; j < kNumJoints; ++j) {
    const Vec3 p = tpl.rest_joints[j];
    const int f = finger_of(j);
    auto &d = tpl.shape_dirs[j];
    d[0] = 0.04 * p;
    d[1] = 0.03 * (p - tpl.rest_joints[1 + 4 * f]);
    d[2] = (f == 0) ? Vec3(0.04 * p) : Vec3::Zero();
    d[3] = Vec3(0.0, 3.0, 0.0);
    d[4] = Vec3(0.02 * (f - 2) * p.norm(), 0.0, 0.0);
    d[5] = (knuckle_of(j) == 0) ? Vec3(0.05 * p.x(), 0.0, 0.0) : Vec3::Zero();
  }

  // Six vertices per bone: two stations along the bone, three around it.
  const int verts = 6 * kNumBones;
  tpl.mesh_rest.reserve(verts);
  tpl.mesh_shape_dirs.reserve(verts);
  tpl.skin_weights = Eigen::MatrixXd::Zero(verts, kNumJoints);
  int vi = 0;
  for (int j = 1; j < kNumJoints; ++j) {
    const int par = kParents[j];
    const Vec3 a = tpl.rest_joints[par];
    const Vec3 b = tpl.rest_joints[j];
    const Vec3 dir = (b - a).normalized();
    Vec3 n1 = dir.cross(Vec3::UnitZ());
    if (n1.norm() < 1e-6) n1 = dir.cross(Vec3::UnitX());
    n1.normalize();
    const Vec3 n2 = dir.cross(n1);
    const int f = finger_of(j);
    const double radius = (f == 0 ? 9.0 : 7.0) * (1.0 - 0.12 * knuckle_of(j));

    for (double u : {0.3, 0.7}) {
      for (int ai = 0; ai < 3; ++ai) {
        const double ang = 2.0 * std::numbers::pi * ai / 3.0;
        const Vec3 ring = radius * (std::cos(ang) * n1 + std::sin(ang) * n2);
        tpl.mesh_rest.push_back(a + u * (b - a) + ring);
        const double wc = (u < 0.5) ? 0.0 : 0.5;
        tpl.skin_weights(vi, j) = wc;
        tpl.skin_weights(vi, par) = 1.0 - wc;

        std::array<Vec3, kBetaDim> md{};
        for (int k = 0; k < 6; ++k) {
          md[k] = (1.0 - u) * tpl.shape_dirs[par][k] + u * tpl.shape_dirs[j][k];
        }
        md[6] = 0.08 * ring;
        md[7] = (par == 0) ? Vec3(0.0, 0.0, 1.2) : Vec3::Zero();
        md[8] = (f == 0) ? Vec3(0.06 * ring) : Vec3::Zero();
        md[9] = (knuckle_of(j) == 3) ? Vec3(0.8 * dir) : Vec3::Zero();
        tpl.mesh_shape_dirs.push_back(md);
        ++vi;
      }
    }
  }

  tpl.validate();
  return tpl;
}

std::vector<Vec3> shaped_rest_joints(const HandTemplate &tpl,
                                     const Eigen::Matrix<double, kBetaDim, 1> &beta) {
  std::vector<Vec3> out(tpl.rest_joints);
  for (int j = 0; j < kNumJoints; ++j) {
    for (int k = 0; k < kBetaDim; ++k) out[j] += beta[k] * tpl.shape_dirs[j][k];
  }
  return out;
}

HandOutput forward_kinematics(const HandTemplate &tpl, const HandParams &params) {
  params.validate();
  const std::vector<Vec3> rest = shaped_rest_joints(tpl, params.beta);

  // Per-joint rotation, identity where nothing is articulated (the tips).
  std::array<Mat3, kNumJoints> local;
  local.fill(Mat3::Identity());
  for (int j = 0; j < kNumArticulated; ++j) {
    local[tpl.articulated[j]] =
        Rotation3::from_axis_angle(params.joint_rotation(j)).matrix();
  }

  // World transform per joint: x -> rw[j] * x + tw[j], composed root to
  // leaf about the shaped rest positions (parents precede children in
  // the canonical ordering).
  std::array<Mat3, kNumJoints> rw;
  std::array<Vec3, kNumJoints> tw;
  rw[0] = local[0];
  tw[0] = rest[0];
  for (int j = 1; j < kNumJoints; ++j) {
    const int par = tpl.parents[j];
    rw[j] = rw[par] * local[j];
    tw[j] = rw[par] * (rest[j] - rest[par]) + tw[par];
  }

  HandOutput out;
  out.joints3d.assign(tw.begin(), tw.end());

  const int v = tpl.vertex_count();
  out.vertices.assign(v, Vec3::Zero());
  for (int i = 0; i < v; ++i) {
    Vec3 shaped = tpl.mesh_rest[i];
    for (int k = 0; k < kBetaDim; ++k) shaped += params.beta[k] * tpl.mesh_shape_dirs[i][k];
    Vec3 acc = Vec3::Zero();
    for (int j = 0; j < kNumJoints; ++j) {
      const double w = tpl.skin_weights(i, j);
      if (w == 0.0) continue;
      acc += w * (rw[j] * (shaped - rest[j]) + tw[j]);
    }
    out.vertices[i] = acc;
  }
  return out;
}

std::vector<double> bone_lengths(const std::vector<Vec3> &joints,
                                 const std::array<int, kNumJoints> &parents) {
  if (joints.size() != kNumJoints) {
    throw DimensionMismatch("bone_lengths: expected 21 joints");
  }
  std::vector<double> out(kNumBones);
  for (int j = 1; j < kNumJoints; ++j) {
    out[j - 1] = (joints[j] - joints[parents[j]]).norm();
  }
  return out;
}

std::vector<double> normalized_bone_lengths(const std::vector<Vec3> &joints,
                                            const std::array<int, kNumJoints> &parents) {
  std::vector<double> out = bone_lengths(joints, parents);
  const double norm = (joints[kMiddleMcp] - joints[0]).norm();
  if (norm < 1e-9) {
    throw DegenerateConfiguration("normalized_bone_lengths: normalizer bone collapsed");
  }
  for (double &l : out) l /= norm;
  return out;
}

std::vector<double> joint_flexion_angles(const std::vector<Vec3> &joints,
                                         const std::array<int, kNumJoints> &parents) {
  if (joints.size() != kNumJoints) {
    throw DimensionMismatch("joint_flexion_angles: expected 21 joints");
  }
  std::array<int, kNumJoints> child_count{};
  std::array<int, kNumJoints> only_child{};
  only_child.fill(-1);
  for (int j = 1; j < kNumJoints; ++j) {
    ++child_count[parents[j]];
    only_child[parents[j]] = j;
  }

  std::vector<double> out;
  for (int j = 1; j < kNumJoints; ++j) {
    if (child_count[j] != 1) continue;
    const Vec3 in = joints[j] - joints[parents[j]];
    const Vec3 next = joints[only_child[j]] - joints[j];
    if (in.norm() < 1e-9 || next.norm() < 1e-9) {
      throw DegenerateConfiguration("joint_flexion_angles: zero-length bone at joint " +
                                    std::to_string(j));
    }
    const double c = std::clamp(in.dot(next) / (in.norm() * next.norm()), -1.0, 1.0);
    out.push_back(std::acos(c) * 180.0 / std::numbers::pi);
  }
  return out;
}

}  // namespace hopose

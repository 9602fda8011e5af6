// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hopose/geometry.hpp"

namespace hopose {

// Similarity-aligned mean point distance (same units as the input).
double aligned_error(const std::vector<Vec3> &pred, const std::vector<Vec3> &gt);

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

// Similarity-align pred onto gt, then score symmetric nearest-neighbor
// hits within the distance threshold.
FScore f_score(const std::vector<Vec3> &pred, const std::vector<Vec3> &gt,
               double threshold);

// Area under the fraction-correct curve for thresholds 0..max_value in
// `steps` uniform intervals, trapezoidal rule, normalized to [0, 1].
double pck_auc(const std::vector<double> &errors, double max_value = 50.0,
               int steps = 100);

struct EvalReport {
  std::int64_t frames = 0;
  double mean_joint_error = 0.0;   // mm, similarity-aligned
  double mean_vertex_error = 0.0;  // mm, similarity-aligned
  double f_at_5mm = 0.0;           // averaged over frames
  double f_at_15mm = 0.0;
  double pck_auc_joints = 0.0;     // pooled joint errors, 0..50 mm
  double pcv_auc_vertices = 0.0;   // pooled vertex errors, 0..50 mm
};

// Frame-wise evaluation of joints and mesh vertices. All four lists must
// agree on frame count; per-frame point counts must match pairwise.
EvalReport evaluate_sequences(const std::vector<std::vector<Vec3>> &pred_joints,
                              const std::vector<std::vector<Vec3>> &gt_joints,
                              const std::vector<std::vector<Vec3>> &pred_vertices,
                              const std::vector<std::vector<Vec3>> &gt_vertices);

}  // namespace hopose

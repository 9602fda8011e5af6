// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hopose/hand_model.hpp"

namespace hopose {

enum class Constraint {
  kIoU,
  kReprojection,
  kBoneLength,
  kJointAngle,
  kSmoothness2D,
  kSmoothnessTheta,
  kShapeDeviation,
};

const char *to_string(Constraint c);

// One network output per frame: image-space joints, root-relative metric
// joints and mesh, and the parameter vector they were decoded from.
struct HandPrediction {
  std::vector<Vec2> j2d;       // 21
  std::vector<Vec3> j3d;       // 21, mm
  std::vector<Vec3> vertices;  // mesh, mm
  HandParams params;

  void validate() const;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  HandPrediction prediction;
  Box2 gt_hand_box;
};

struct SequenceRecord {
  std::string sequence_id;
  std::vector<FrameRecord> frames;

  // Strictly ascending frame indices, consistent vertex counts.
  void validate() const;
};

// Screening thresholds. Defaults follow the training recipe this filter
// was tuned for.
struct FilterConfig {
  double iou_min = 0.6;          // projected mesh box vs annotated box
  double reproj_max = 0.65;      // mean per-joint distance, normalized
  double bone_min = 0.1;         // min normalized bone length
  double angle_min_deg = 0.0;    // flexion angles, exclusive bounds
  double angle_max_deg = 90.0;
  double smooth2d_max = 0.5;     // normalized 2d drift between frames
  double smooth_theta_max = 0.01;  // l2 drift of theta between frames
  double shape_sigma_mult = 2.0;   // beta outlier cut in sigma units

  void validate() const;
};

struct FilterDecision {
  std::int64_t frame_index = 0;
  bool accepted = true;
  std::vector<Constraint> failed;  // unique, in enum order

  bool has(Constraint c) const;
  void add_failure(Constraint c);
};

struct FilterSummary {
  std::int64_t total = 0;
  std::int64_t accepted = 0;
  std::map<Constraint, std::int64_t> failures;
};

// Component-wise mean over test-time augmented predictions. Throws
// EmptyEnsemble on an empty list.
HandPrediction ensemble_average(const std::vector<HandPrediction> &predictions);

// Root-relative 2D joints divided by a positive diagonal.
std::vector<Vec2> normalize_joints2d(const std::vector<Vec2> &j2d, double diagonal);

// Per-frame geometric screen: camera fit + box IoU, normalized
// reprojection agreement, bone lengths, flexion angles. A degenerate
// camera fit rejects the frame (tagged with the constraints it blocks)
// instead of throwing.
FilterDecision spatial_check(const FrameRecord &frame, const HandTemplate &tpl,
                             const FilterConfig &cfg);

// Frame-to-frame drift bounds. Each spatially valid frame is compared to
// the most recent frame that survived both the spatial and the temporal
// screen; the first such frame passes by convention. Returns the merged
// decisions.
std::vector<FilterDecision> temporal_check(const SequenceRecord &seq,
                                           const std::vector<FilterDecision> &spatial,
                                           const HandTemplate &tpl,
                                           const FilterConfig &cfg);

// Consensus shape screen over the frames still standing: one pass that
// drops betas further than shape_sigma_mult * sigma from the mean.
std::vector<FilterDecision> shape_check(const SequenceRecord &seq,
                                        const std::vector<FilterDecision> &decisions,
                                        const FilterConfig &cfg);

// spatial -> temporal -> shape.
std::vector<FilterDecision> filter_sequence(const SequenceRecord &seq,
                                            const HandTemplate &tpl,
                                            const FilterConfig &cfg);

FilterSummary summarize(const std::vector<FilterDecision> &decisions);

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/pseudo_filter.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hopose {

const char *to_string(Constraint c) {
  switch (c) {
    case Constraint::kIoU: return "IoU";
    case Constraint::kReprojection: return "Reprojection";
    case Constraint::kBoneLength: return "BoneLength";
    case Constraint::kJointAngle: return "JointAngle";
    case Constraint::kSmoothness2D: return "Smoothness2D";
    case Constraint::kSmoothnessTheta: return "SmoothnessTheta";
    case Constraint::kShapeDeviation: return "ShapeDeviation";
  }
  return "?";
}

void HandPrediction::validate() const {
  if (j2d.size() != kNumJoints || j3d.size() != kNumJoints) {
    throw DimensionMismatch("hand prediction: expected 21 joints");
  }
  if (vertices.empty()) {
    throw DimensionMismatch("hand prediction: mesh vertices missing");
  }
  for (const auto &p : j2d) {
    if (!all_finite(p)) throw DimensionMismatch("hand prediction: non-finite 2d joint");
  }
  for (const auto &p : j3d) {
    if (!all_finite(p)) throw DimensionMismatch("hand prediction: non-finite 3d joint");
  }
  for (const auto &p : vertices) {
    if (!all_finite(p)) throw DimensionMismatch("hand prediction: non-finite vertex");
  }
  params.validate();
}

void SequenceRecord::validate() const {
  for (size_t i = 0; i < frames.size(); ++i) {
    frames[i].prediction.validate();
    if (i > 0) {
      if (frames[i].frame_index <= frames[i - 1].frame_index) {
        throw DimensionMismatch("sequence: frame indices must be strictly ascending");
      }
      if (frames[i].prediction.vertices.size() != frames[0].prediction.vertices.size()) {
        throw DimensionMismatch("sequence: vertex count changes between frames");
      }
    }
  }
}

void FilterConfig::validate() const {
  const bool ok = iou_min > 0.0 && iou_min <= 1.0 && reproj_max > 0.0 &&
                  bone_min > 0.0 && angle_min_deg >= 0.0 &&
                  angle_max_deg > angle_min_deg && angle_max_deg <= 180.0 &&
                  smooth2d_max > 0.0 && smooth_theta_max > 0.0 &&
                  shape_sigma_mult > 0.0;
  if (!ok) throw DimensionMismatch("filter config: threshold out of range");
}

bool FilterDecision::has(Constraint c) const {
  return std::find(failed.begin(), failed.end(), c) != failed.end();
}

void FilterDecision::add_failure(Constraint c) {
  if (!has(c)) {
    failed.push_back(c);
    std::sort(failed.begin(), failed.end());
    accepted = false;
  }
}

HandPrediction ensemble_average(const std::vector<HandPrediction> &predictions) {
  if (predictions.empty()) {
    throw EmptyEnsemble("ensemble_average: no predictions to average");
  }
  const auto &first = predictions[0];
  first.validate();
  HandPrediction mean;
  mean.j2d.assign(first.j2d.size(), Vec2::Zero());
  mean.j3d.assign(first.j3d.size(), Vec3::Zero());
  mean.vertices.assign(first.vertices.size(), Vec3::Zero());
  mean.params.theta.setZero();
  mean.params.beta.setZero();

  for (const auto &p : predictions) {
    p.validate();
    if (p.vertices.size() != first.vertices.size()) {
      throw DimensionMismatch("ensemble_average: vertex count mismatch");
    }
    for (size_t i = 0; i < mean.j2d.size(); ++i) mean.j2d[i] += p.j2d[i];
    for (size_t i = 0; i < mean.j3d.size(); ++i) mean.j3d[i] += p.j3d[i];
    for (size_t i = 0; i < mean.vertices.size(); ++i) mean.vertices[i] += p.vertices[i];
    mean.params.theta += p.params.theta;
    mean.params.beta += p.params.beta;
  }
  const double n = static_cast<double>(predictions.size());
  for (auto &v : mean.j2d) v /= n;
  for (auto &v : mean.j3d) v /= n;
  for (auto &v : mean.vertices) v /= n;
  mean.params.theta /= n;
  mean.params.beta /= n;
  return mean;
}

std::vector<Vec2> normalize_joints2d(const std::vector<Vec2> &j2d, double diagonal) {
  if (j2d.empty()) throw DimensionMismatch("normalize_joints2d: empty joint set");
  if (!(diagonal > 0.0)) {
    throw DegenerateConfiguration("normalize_joints2d: non-positive diagonal");
  }
  std::vector<Vec2> out;
  out.reserve(j2d.size());
  for (const auto &p : j2d) out.push_back((p - j2d[0]) / diagonal);
  return out;
}

namespace {

// Camera fit plus the self-normalized 2d joints of one frame. The
// divisor is the bounding-box diagonal of the reprojected 3d joints: it
// stays meaningful even when the predicted 2d joints are garbage, which
// is exactly when the screen has to fire.
struct FrameGeometry {
  WeakPerspectiveCamera camera;
  std::vector<Vec2> reprojected;      // camera applied to j3d
  double diagonal = 0.0;
  std::vector<Vec2> normalized_j2d;   // (j2d - root) / diagonal
};

std::optional<FrameGeometry> frame_geometry(const FrameRecord &frame) {
  FrameGeometry g;
  try {
    g.camera = fit_weak_camera(frame.prediction.j3d, frame.prediction.j2d);
  } catch (const DegenerateConfiguration &) {
    return std::nullopt;
  }
  g.reprojected = project_weak(g.camera, frame.prediction.j3d);
  g.diagonal = bbox_of_points(g.reprojected).diagonal();
  if (!(g.diagonal > 1e-9)) return std::nullopt;
  g.normalized_j2d = normalize_joints2d(frame.prediction.j2d, g.diagonal);
  return g;
}

}  // namespace

FilterDecision spatial_check(const FrameRecord &frame, const HandTemplate &tpl,
                             const FilterConfig &cfg) {
  cfg.validate();
  frame.prediction.validate();

  FilterDecision d;
  d.frame_index = frame.frame_index;

  const std::optional<FrameGeometry> geo = frame_geometry(frame);
  if (!geo) {
    // No usable camera: neither box agreement nor reprojection agreement
    // can be evaluated, so both count as failed.
    d.add_failure(Constraint::kIoU);
    d.add_failure(Constraint::kReprojection);
  } else {
    const std::vector<Vec2> mesh2d = project_weak(geo->camera, frame.prediction.vertices);
    if (iou(bbox_of_points(mesh2d), frame.gt_hand_box) < cfg.iou_min) {
      d.add_failure(Constraint::kIoU);
    }
    double dist = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const Vec2 p = (geo->reprojected[j] - geo->reprojected[0]) / geo->diagonal;
      dist += (p - geo->normalized_j2d[j]).norm();
    }
    if (dist / kNumJoints > cfg.reproj_max) d.add_failure(Constraint::kReprojection);
  }

  try {
    const std::vector<double> bones =
        normalized_bone_lengths(frame.prediction.j3d, tpl.parents);
    if (*std::min_element(bones.begin(), bones.end()) < cfg.bone_min) {
      d.add_failure(Constraint::kBoneLength);
    }
  } catch (const DegenerateConfiguration &) {
    d.add_failure(Constraint::kBoneLength);
  }

  try {
    for (double a : joint_flexion_angles(frame.prediction.j3d, tpl.parents)) {
      if (!(a > cfg.angle_min_deg && a < cfg.angle_max_deg)) {
        d.add_failure(Constraint::kJointAngle);
        break;
      }
    }
  } catch (const DegenerateConfiguration &) {
    d.add_failure(Constraint::kJointAngle);
  }

  return d;
}

std::vector<FilterDecision> temporal_check(const SequenceRecord &seq,
                                           const std::vector<FilterDecision> &spatial,
                                           const HandTemplate &tpl,
                                           const FilterConfig &cfg) {
  (void)tpl;
  cfg.validate();
  if (seq.frames.size() != spatial.size()) {
    throw DimensionMismatch("temporal_check: one spatial decision per frame expected");
  }

  std::vector<FilterDecision> out(spatial);
  std::optional<size_t> anchor;
  std::optional<std::vector<Vec2>> anchor_norm2d;

  for (size_t i = 0; i < seq.frames.size(); ++i) {
    if (!out[i].accepted) continue;  // spatially rejected frames are out already

    const std::optional<FrameGeometry> geo = frame_geometry(seq.frames[i]);
    if (!geo) {
      // Spatial acceptance implies a valid fit; degenerate here means the
      // 2d drift cannot be measured.
      out[i].add_failure(Constraint::kSmoothness2D);
      continue;
    }

    if (anchor) {
      double drift = 0.0;
      for (int j = 0; j < kNumJoints; ++j) {
        drift += (geo->normalized_j2d[j] - (*anchor_norm2d)[j]).norm();
      }
      if (drift / kNumJoints > cfg.smooth2d_max) {
        out[i].add_failure(Constraint::kSmoothness2D);
      }
      const double dtheta = (seq.frames[i].prediction.params.theta -
                             seq.frames[*anchor].prediction.params.theta)
                                .norm();
      if (dtheta > cfg.smooth_theta_max) {
        out[i].add_failure(Constraint::kSmoothnessTheta);
      }
    }
    if (out[i].accepted) {
      anchor = i;
      anchor_norm2d = geo->normalized_j2d;
    }
  }
  return out;
}

std::vector<FilterDecision> shape_check(const SequenceRecord &seq,
                                        const std::vector<FilterDecision> &decisions,
                                        const FilterConfig &cfg) {
  cfg.validate();
  if (seq.frames.size() != decisions.size()) {
    throw DimensionMismatch("shape_check: one decision per frame expected");
  }
  std::vector<FilterDecision> out(decisions);

  std::vector<size_t> candidates;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i].accepted) candidates.push_back(i);
  }
  if (candidates.empty()) return out;

  Eigen::Matrix<double, kBetaDim, 1> mean = Eigen::Matrix<double, kBetaDim, 1>::Zero();
  for (size_t i : candidates) mean += seq.frames[i].prediction.params.beta;
  mean /= static_cast<double>(candidates.size());

  double var = 0.0;
  for (size_t i : candidates) {
    var += (seq.frames[i].prediction.params.beta - mean).squaredNorm();
  }
  const double sigma = std::sqrt(var / static_cast<double>(candidates.size()));

  for (size_t i : candidates) {
    const double dev = (seq.frames[i].prediction.params.beta - mean).norm();
    if (dev > cfg.shape_sigma_mult * sigma) {
      out[i].add_failure(Constraint::kShapeDeviation);
    }
  }
  return out;
}

std::vector<FilterDecision> filter_sequence(const SequenceRecord &seq,
                                            const HandTemplate &tpl,
                                            const FilterConfig &cfg) {
  seq.validate();
  std::vector<FilterDecision> decisions;
  decisions.reserve(seq.frames.size());
  for (const auto &frame : seq.frames) {
    decisions.push_back(spatial_check(frame, tpl, cfg));
  }
  decisions = temporal_check(seq, decisions, tpl, cfg);
  return shape_check(seq, decisions, cfg);
}

FilterSummary summarize(const std::vector<FilterDecision> &decisions) {
  FilterSummary s;
  s.total = static_cast<std::int64_t>(decisions.size());
  for (const auto &d : decisions) {
    if (d.accepted) ++s.accepted;
    for (Constraint c : d.failed) ++s.failures[c];
  }
  return s;
}

}  // namespace hopose

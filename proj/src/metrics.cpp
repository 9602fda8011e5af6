// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hopose {

double aligned_error(const std::vector<Vec3> &pred, const std::vector<Vec3> &gt) {
  const auto [aligned, xf] = procrustes_align(pred, gt);
  (void)xf;
  double sum = 0.0;
  for (size_t i = 0; i < aligned.size(); ++i) sum += (aligned[i] - gt[i]).norm();
  return sum / static_cast<double>(aligned.size());
}

namespace {

double nearest_distance(const Vec3 &p, const std::vector<Vec3> &cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &q : cloud) best = std::min(best, (p - q).norm());
  return best;
}

}  // namespace

FScore f_score(const std::vector<Vec3> &pred, const std::vector<Vec3> &gt,
               double threshold) {
  if (!(threshold > 0.0)) {
    throw DimensionMismatch("f_score: threshold must be positive");
  }
  const auto [aligned, xf] = procrustes_align(pred, gt);
  (void)xf;

  int hit_pred = 0;
  for (const auto &p : aligned) {
    if (nearest_distance(p, gt) <= threshold) ++hit_pred;
  }
  int hit_gt = 0;
  for (const auto &q : gt) {
    if (nearest_distance(q, aligned) <= threshold) ++hit_gt;
  }

  FScore s;
  s.precision = static_cast<double>(hit_pred) / static_cast<double>(aligned.size());
  s.recall = static_cast<double>(hit_gt) / static_cast<double>(gt.size());
  s.f = (s.precision + s.recall > 0.0)
            ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
            : 0.0;
  return s;
}

double pck_auc(const std::vector<double> &errors, double max_value, int steps) {
  if (errors.empty()) throw DimensionMismatch("pck_auc: no errors given");
  if (!(max_value > 0.0) || steps < 1) {
    throw DimensionMismatch("pck_auc: bad threshold range");
  }
  const double n = static_cast<double>(errors.size());
  auto fraction_at = [&](double tau) {
    std::int64_t c = 0;
    for (double e : errors) c += (e <= tau) ? 1 : 0;
    return static_cast<double>(c) / n;
  };
  double auc = 0.0;
  double prev = fraction_at(0.0);
  for (int k = 1; k <= steps; ++k) {
    const double cur = fraction_at(max_value * k / steps);
    auc += 0.5 * (prev + cur);
    prev = cur;
  }
  return auc / steps;
}

EvalReport evaluate_sequences(const std::vector<std::vector<Vec3>> &pred_joints,
                              const std::vector<std::vector<Vec3>> &gt_joints,
                              const std::vector<std::vector<Vec3>> &pred_vertices,
                              const std::vector<std::vector<Vec3>> &gt_vertices) {
  const size_t n = pred_joints.size();
  if (gt_joints.size() != n || pred_vertices.size() != n || gt_vertices.size() != n) {
    throw DimensionMismatch("evaluate_sequences: frame counts disagree");
  }
  if (n == 0) throw DimensionMismatch("evaluate_sequences: no frames");

  EvalReport r;
  r.frames = static_cast<std::int64_t>(n);
  std::vector<double> joint_errors, vertex_errors;
  double f5 = 0.0, f15 = 0.0;

  // Distances below a tenth of a nanometer are alignment round-off, not
  // signal; clamp them so exact matches report exact zeros.
  auto denoise = [](double d) { return d < 1e-9 ? 0.0 : d; };

  for (size_t i = 0; i < n; ++i) {
    {
      const auto [aligned, xf] = procrustes_align(pred_joints[i], gt_joints[i]);
      (void)xf;
      for (size_t j = 0; j < aligned.size(); ++j) {
        joint_errors.push_back(denoise((aligned[j] - gt_joints[i][j]).norm()));
      }
    }
    {
      const auto [aligned, xf] = procrustes_align(pred_vertices[i], gt_vertices[i]);
      (void)xf;
      for (size_t j = 0; j < aligned.size(); ++j) {
        vertex_errors.push_back(denoise((aligned[j] - gt_vertices[i][j]).norm()));
      }
    }
    f5 += f_score(pred_vertices[i], gt_vertices[i], 5.0).f;
    f15 += f_score(pred_vertices[i], gt_vertices[i], 15.0).f;
  }

  auto mean = [](const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  r.mean_joint_error = mean(joint_errors);
  r.mean_vertex_error = mean(vertex_errors);
  r.f_at_5mm = f5 / static_cast<double>(n);
  r.f_at_15mm = f15 / static_cast<double>(n);
  r.pck_auc_joints = pck_auc(joint_errors);
  r.pcv_auc_vertices = pck_auc(vertex_errors);
  return r;
}

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/object_pose.hpp"

#include <algorithm>
#include <cmath>

namespace hopose {

const std::array<std::array<int, 2>, 12> &ObjectModel::edge_corner_pairs() {
  static const std::array<std::array<int, 2>, 12> pairs = [] {
    std::array<std::array<int, 2>, 12> out{};
    int e = 0;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        const int diff = i ^ j;
        if (diff == 1 || diff == 2 || diff == 4) out[e++] = {i, j};
      }
    }
    return out;
  }();
  return pairs;
}

namespace {

std::vector<Vec3> control_points_from_corners(const std::vector<Vec3> &corners) {
  std::vector<Vec3> cp(corners.begin(), corners.end());
  cp.resize(kNumControlPoints);
  for (int e = 0; e < 12; ++e) {
    const auto &pair = ObjectModel::edge_corner_pairs()[e];
    cp[8 + e] = 0.5 * (corners[pair[0]] + corners[pair[1]]);
  }
  Vec3 center = Vec3::Zero();
  for (int i = 0; i < 8; ++i) center += corners[i];
  cp[20] = center / 8.0;
  return cp;
}

}  // namespace

ObjectModel ObjectModel::from_extents(double ex, double ey, double ez,
                                      std::vector<Vec3> mesh) {
  if (!(ex > 0.0) || !(ey > 0.0) || !(ez > 0.0)) {
    throw DegenerateConfiguration("object model: extents must be positive");
  }
  std::vector<Vec3> corners(8);
  for (int i = 0; i < 8; ++i) {
    corners[i] = Vec3((i & 1) ? ex / 2 : -ex / 2, (i & 2) ? ey / 2 : -ey / 2,
                      (i & 4) ? ez / 2 : -ez / 2);
  }
  return from_corners(corners, std::move(mesh));
}

ObjectModel ObjectModel::from_corners(const std::vector<Vec3> &corners,
                                      std::vector<Vec3> mesh) {
  if (corners.size() != 8) {
    throw DimensionMismatch("object model: expected 8 corners");
  }
  ObjectModel m;
  m.control_points = control_points_from_corners(corners);
  m.mesh_vertices = mesh.empty() ? corners : std::move(mesh);
  double d = 0.0;
  for (size_t i = 0; i < m.mesh_vertices.size(); ++i) {
    for (size_t j = i + 1; j < m.mesh_vertices.size(); ++j) {
      d = std::max(d, (m.mesh_vertices[i] - m.mesh_vertices[j]).norm());
    }
  }
  m.diameter = d;
  m.validate();
  return m;
}

void ObjectModel::validate() const {
  if (control_points.size() != kNumControlPoints) {
    throw DimensionMismatch("object model: expected 21 control points");
  }
  for (const auto &p : control_points) {
    if (!all_finite(p)) throw DimensionMismatch("object model: non-finite control point");
  }
  for (int e = 0; e < 12; ++e) {
    const auto &pair = edge_corner_pairs()[e];
    const Vec3 mid = 0.5 * (control_points[pair[0]] + control_points[pair[1]]);
    if ((control_points[8 + e] - mid).norm() > 1e-9) {
      throw DegenerateConfiguration("object model: midpoint " + std::to_string(e) +
                                    " is not the mean of its corners");
    }
  }
  Vec3 center = Vec3::Zero();
  for (int i = 0; i < 8; ++i) center += control_points[i];
  center /= 8.0;
  if ((control_points[20] - center).norm() > 1e-9) {
    throw DegenerateConfiguration("object model: center point is off the corner mean");
  }
  if (mesh_vertices.empty() || !(diameter > 0.0) || !std::isfinite(diameter)) {
    throw DegenerateConfiguration("object model: mesh missing or diameter not positive");
  }
}

GridPrediction GridPrediction::zeros(int grid, int num_points) {
  GridPrediction g;
  g.grid = grid;
  g.num_points = num_points;
  g.offsets.assign(static_cast<size_t>(grid) * grid * num_points, Vec2::Zero());
  g.confidences.assign(static_cast<size_t>(grid) * grid * num_points, 0.5);
  return g;
}

void GridPrediction::validate() const {
  const size_t expect = static_cast<size_t>(cells()) * num_points;
  if (grid <= 0 || num_points <= 0 || offsets.size() != expect ||
      confidences.size() != expect) {
    throw DimensionMismatch("grid prediction: table sizes disagree");
  }
  for (const auto &o : offsets) {
    if (!all_finite(o)) throw DimensionMismatch("grid prediction: non-finite offset");
  }
  for (double c : confidences) {
    if (!(c > 0.0) || !(c < 1.0)) {
      throw DimensionMismatch("grid prediction: confidence outside (0, 1)");
    }
  }
}

Vec2 cell_center(int row, int col, double stride) {
  return {stride * (col + 0.5), stride * (row + 0.5)};
}

std::vector<std::vector<ControlPointProposal>> decode_proposals(
    const GridPrediction &grid, double stride) {
  grid.validate();
  std::vector<std::vector<ControlPointProposal>> out(grid.num_points);
  for (auto &v : out) v.reserve(grid.cells());
  for (int r = 0; r < grid.grid; ++r) {
    for (int c = 0; c < grid.grid; ++c) {
      const int cell = r * grid.grid + c;
      const Vec2 center = cell_center(r, c, stride);
      for (int p = 0; p < grid.num_points; ++p) {
        const int i = grid.index(cell, p);
        out[p].push_back({r, c, center + grid.offsets[i], grid.confidences[i]});
      }
    }
  }
  return out;
}

std::vector<Vec2> select_topk(
    const std::vector<std::vector<ControlPointProposal>> &proposals, int k) {
  if (k <= 0) throw DimensionMismatch("select_topk: k must be positive");
  std::vector<Vec2> out;
  out.reserve(proposals.size());
  for (const auto &cand : proposals) {
    if (cand.empty()) throw DimensionMismatch("select_topk: empty proposal list");
    std::vector<ControlPointProposal> sorted(cand);
    std::sort(sorted.begin(), sorted.end(),
              [](const ControlPointProposal &a, const ControlPointProposal &b) {
                if (a.confidence != b.confidence) return a.confidence > b.confidence;
                if (a.row != b.row) return a.row < b.row;
                return a.col < b.col;
              });
    const int take = std::min<int>(k, static_cast<int>(sorted.size()));
    Vec2 acc = Vec2::Zero();
    double wsum = 0.0;
    for (int i = 0; i < take; ++i) {
      acc += sorted[i].confidence * sorted[i].point;
      wsum += sorted[i].confidence;
    }
    out.push_back(acc / wsum);
  }
  return out;
}

double conf_target(const Vec2 &delta) { return std::exp(-delta.norm()); }

double p2d_loss(const GridPrediction &grid, const std::vector<Vec2> &gt_points,
                double stride) {
  grid.validate();
  if (static_cast<int>(gt_points.size()) != grid.num_points) {
    throw DimensionMismatch("p2d_loss: target count mismatch");
  }
  double loss = 0.0;
  for (int r = 0; r < grid.grid; ++r) {
    for (int c = 0; c < grid.grid; ++c) {
      const int cell = r * grid.grid + c;
      const Vec2 center = cell_center(r, c, stride);
      for (int p = 0; p < grid.num_points; ++p) {
        const Vec2 d = center + grid.offsets[grid.index(cell, p)] - gt_points[p];
        loss += d.lpNorm<1>();
      }
    }
  }
  return loss;
}

double conf_loss(const GridPrediction &grid, const std::vector<Vec2> &gt_points,
                 double stride) {
  grid.validate();
  if (static_cast<int>(gt_points.size()) != grid.num_points) {
    throw DimensionMismatch("conf_loss: target count mismatch");
  }
  double loss = 0.0;
  for (int r = 0; r < grid.grid; ++r) {
    for (int c = 0; c < grid.grid; ++c) {
      const int cell = r * grid.grid + c;
      const Vec2 center = cell_center(r, c, stride);
      for (int p = 0; p < grid.num_points; ++p) {
        const int i = grid.index(cell, p);
        const Vec2 d = center + grid.offsets[i] - gt_points[p];
        const double err = grid.confidences[i] - conf_target(d);
        loss += err * err;
      }
    }
  }
  return loss;
}

Pose6Dof recover_pose(const std::vector<Vec2> &points2d, const ObjectModel &model,
                      const PerspectiveCamera &cam) {
  model.validate();
  if (points2d.size() != model.control_points.size()) {
    throw DimensionMismatch("recover_pose: expected one 2d point per control point");
  }
  return solve_pnp(model.control_points, points2d, cam);
}

AddResult add_metric(const Pose6Dof &pred, const Pose6Dof &gt,
                     const ObjectModel &model) {
  model.validate();
  double sum = 0.0;
  for (const auto &v : model.mesh_vertices) {
    sum += (pred.apply(v) - gt.apply(v)).norm();
  }
  AddResult r;
  r.mean_distance = sum / static_cast<double>(model.mesh_vertices.size());
  r.within_tenth_diameter = r.mean_distance < 0.1 * model.diameter;
  return r;
}

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "hopose/geometry.hpp"

namespace hopose {

// 8 bounding-box corners, 12 edge midpoints, 1 center.
inline constexpr int kNumControlPoints = 21;
inline constexpr int kGridSize = 32;
inline constexpr double kGridStride = 16.0;  // 512 px crop / 32 cells

// Rigid object described by its bounding-box control points and a mesh
// used for the ADD metric. Corner order: index bit 0/1/2 picks the
// +x/+y/+z half. Edges are corner pairs differing in exactly one bit,
// enumerated in lexicographic order.
struct ObjectModel {
  std::vector<Vec3> control_points;  // 21: corners, then midpoints, then center
  std::vector<Vec3> mesh_vertices;
  double diameter = 0.0;             // max pairwise mesh distance

  // Empty mesh defaults to the 8 corners.
  static ObjectModel from_extents(double ex, double ey, double ez,
                                  std::vector<Vec3> mesh = {});
  static ObjectModel from_corners(const std::vector<Vec3> &corners,
                                  std::vector<Vec3> mesh = {});

  // Midpoints must equal their corner means, the center the mean of all
  // corners (1e-9), and the mesh diameter must be positive.
  void validate() const;

  static const std::array<std::array<int, 2>, 12> &edge_corner_pairs();
};

// Dense per-cell prediction on a square grid: for every cell and control
// point a 2D offset from the cell center plus a confidence in (0,1).
struct GridPrediction {
  int grid = kGridSize;
  int num_points = kNumControlPoints;
  std::vector<Vec2> offsets;        // grid*grid*num_points, cell-major
  std::vector<double> confidences;  // same layout

  int cells() const { return grid * grid; }
  int index(int cell, int point) const { return cell * num_points + point; }
  void validate() const;

  static GridPrediction zeros(int grid = kGridSize, int num_points = kNumControlPoints);
};

struct ControlPointProposal {
  int row = 0, col = 0;
  Vec2 point = Vec2::Zero();
  double confidence = 0.0;
};

Vec2 cell_center(int row, int col, double stride = kGridStride);

// Every cell votes for every control point: center + offset.
std::vector<std::vector<ControlPointProposal>> decode_proposals(
    const GridPrediction &grid, double stride = kGridStride);

// Confidence-weighted mean of the k most confident proposals per control
// point. Ties break deterministically on (row, col) ascending.
std::vector<Vec2> select_topk(
    const std::vector<std::vector<ControlPointProposal>> &proposals, int k = 10);

// exp(-|delta|): 1 for a perfect vote, decaying with pixel error.
double conf_target(const Vec2 &delta);

// L1 offset regression target: sum over cells and control points of
// |predicted point - target point| (both coordinates).
double p2d_loss(const GridPrediction &grid, const std::vector<Vec2> &gt_points,
                double stride = kGridStride);

// Squared error between predicted confidences and conf_target of the
// prediction residuals.
double conf_loss(const GridPrediction &grid, const std::vector<Vec2> &gt_points,
                 double stride = kGridStride);

// PnP on the 21 control points.
Pose6Dof recover_pose(const std::vector<Vec2> &points2d, const ObjectModel &model,
                      const PerspectiveCamera &cam);

struct AddResult {
  double mean_distance = 0.0;
  bool within_tenth_diameter = false;
};

// Mean vertex distance between the two posed meshes (ADD) and the
// 0.1-diameter acceptance flag.
AddResult add_metric(const Pose6Dof &pred, const Pose6Dof &gt,
                     const ObjectModel &model);

}  // namespace hopose

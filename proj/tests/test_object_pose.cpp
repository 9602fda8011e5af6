// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <bit>
#include <cmath>
#include <vector>

#include "hopose/object_pose.hpp"
#include "test_support.hpp"

using namespace hopose;
using testsup::TestRng;

namespace {

// Rebuild the control-point layout from its definition: corner index bit
// 0/1/2 selects the positive x/y/z half, edges are corner pairs that
// differ in exactly one bit taken in lexicographic order, the center is
// the corner mean.
std::vector<Vec3> oracle_control_points(double ex, double ey, double ez) {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) {
    corners.emplace_back((i & 1) ? 0.5 * ex : -0.5 * ex,
                         (i & 2) ? 0.5 * ey : -0.5 * ey,
                         (i & 4) ? 0.5 * ez : -0.5 * ez);
  }
  std::vector<Vec3> pts = corners;
  for (int a = 0; a < 8; ++a) {
    for (int b = a + 1; b < 8; ++b) {
      if (std::popcount(static_cast<unsigned>(a ^ b)) == 1)
        pts.push_back(0.5 * (corners[a] + corners[b]));
    }
  }
  Vec3 center = Vec3::Zero();
  for (const Vec3 &c : corners) center += c;
  pts.push_back(center / 8.0);
  return pts;
}

double brute_diameter(const std::vector<Vec3> &pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, (pts[i] - pts[j]).norm());
  return best;
}

GridPrediction random_grid(TestRng &rng, int grid, int points) {
  GridPrediction g = GridPrediction::zeros(grid, points);
  for (auto &o : g.offsets) o = Vec2(4.0 * rng.gauss(), 4.0 * rng.gauss());
  for (auto &c : g.confidences) c = rng.uni(0.05, 0.95);
  return g;
}

}  // namespace

TEST_CASE("box control points follow the documented layout") {
  const double ex = 80.0, ey = 60.0, ez = 100.0;
  const ObjectModel model = ObjectModel::from_extents(ex, ey, ez);
  const std::vector<Vec3> expected = oracle_control_points(ex, ey, ez);
  REQUIRE(model.control_points.size() == kNumControlPoints);
  for (int i = 0; i < kNumControlPoints; ++i)
    CHECK((model.control_points[i] - expected[i]).norm() < 1e-12);

  // Edge table: 12 pairs, each differing in exactly one bit, sorted.
  const auto &edges = ObjectModel::edge_corner_pairs();
  std::vector<std::array<int, 2>> expected_edges;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b)
      if (std::popcount(static_cast<unsigned>(a ^ b)) == 1)
        expected_edges.push_back({a, b});
  REQUIRE(edges.size() == expected_edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    CHECK(edges[e][0] == expected_edges[e][0]);
    CHECK(edges[e][1] == expected_edges[e][1]);
  }

  // Default mesh is the corner set; diameter is the full diagonal.
  CHECK(model.mesh_vertices.size() == 8);
  CHECK(model.diameter ==
        doctest::Approx(brute_diameter(model.mesh_vertices)).epsilon(1e-12));
  CHECK(model.diameter ==
        doctest::Approx(std::sqrt(ex * ex + ey * ey + ez * ez)).epsilon(1e-12));
  CHECK_NOTHROW(model.validate());

  // from_corners accepts a rotated box too.
  TestRng rng(51);
  const Mat3 r = testsup::random_rotation(rng);
  std::vector<Vec3> rotated;
  for (int i = 0; i < 8; ++i) rotated.push_back(r * expected[i]);
  const ObjectModel turned = ObjectModel::from_corners(rotated);
  CHECK_NOTHROW(turned.validate());
  for (int i = 0; i < kNumControlPoints; ++i)
    CHECK((turned.control_points[i] - r * expected[i]).norm() < 1e-9);
}

TEST_CASE("object model validation spots broken layouts") {
  CHECK_THROWS_AS(ObjectModel::from_extents(-1.0, 2.0, 3.0), DegenerateConfiguration);
  CHECK_THROWS_AS(ObjectModel::from_corners(std::vector<Vec3>(7)), DimensionMismatch);

  ObjectModel bad_mid = ObjectModel::from_extents(10, 10, 10);
  bad_mid.control_points[8] += Vec3(0.1, 0, 0);
  CHECK_THROWS_AS(bad_mid.validate(), DegenerateConfiguration);

  ObjectModel bad_center = ObjectModel::from_extents(10, 10, 10);
  bad_center.control_points[20] += Vec3(0, 0.1, 0);
  CHECK_THROWS_AS(bad_center.validate(), DegenerateConfiguration);

  ObjectModel flat = ObjectModel::from_extents(10, 10, 10);
  flat.diameter = 0.0;
  CHECK_THROWS_AS(flat.validate(), DegenerateConfiguration);
}

TEST_CASE("grid prediction bookkeeping") {
  const GridPrediction g = GridPrediction::zeros(4, 3);
  CHECK(g.cells() == 16);
  CHECK(g.offsets.size() == 48);
  CHECK(g.confidences.size() == 48);
  CHECK(g.index(5, 2) == 17);
  CHECK_NOTHROW(g.validate());
  for (double c : g.confidences) CHECK(c == 0.5);

  GridPrediction bad = g;
  bad.confidences[7] = 1.0;  // open interval
  CHECK_THROWS_AS(bad.validate(), DimensionMismatch);
  GridPrediction nan = g;
  nan.offsets[3].x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan.validate(), DimensionMismatch);
  GridPrediction short_table = g;
  short_table.offsets.pop_back();
  CHECK_THROWS_AS(short_table.validate(), DimensionMismatch);
}

TEST_CASE("cell centers and proposal decoding") {
  CHECK(cell_center(0, 0, 16.0) == Vec2(8.0, 8.0));
  CHECK(cell_center(2, 5, 16.0) == Vec2(88.0, 40.0));  // x tracks the column
  CHECK(cell_center(3, 1, 10.0) == Vec2(15.0, 35.0));

  GridPrediction g = GridPrediction::zeros(3, 2);
  g.offsets[g.index(4, 1)] = Vec2(2.5, -1.5);  // cell 4 = row 1, col 1
  g.confidences[g.index(4, 1)] = 0.9;

  const auto proposals = decode_proposals(g, 16.0);
  REQUIRE(proposals.size() == 2);           // one list per control point
  REQUIRE(proposals[0].size() == 9);        // every cell votes
  for (int p = 0; p < 2; ++p) {
    for (int cell = 0; cell < 9; ++cell) {
      const ControlPointProposal &prop = proposals[p][cell];
      CHECK(prop.row == cell / 3);
      CHECK(prop.col == cell % 3);
      const Vec2 expected = cell_center(prop.row, prop.col, 16.0) +
                            g.offsets[g.index(cell, p)];
      CHECK((prop.point - expected).norm() < 1e-12);
      CHECK(prop.confidence == g.confidences[g.index(cell, p)]);
    }
  }
  CHECK((proposals[1][4].point - Vec2(26.5, 22.5)).norm() < 1e-12);
}

TEST_CASE("top-k selection averages by confidence and breaks ties by cell") {
  std::vector<ControlPointProposal> cand(3);
  cand[0] = {0, 0, Vec2(10.0, 0.0), 0.9};
  cand[1] = {0, 1, Vec2(20.0, 0.0), 0.8};
  cand[2] = {1, 0, Vec2(1000.0, 0.0), 0.1};
  const std::vector<Vec2> picked = select_topk({cand}, 2);
  REQUIRE(picked.size() == 1);
  const double expected_x = (0.9 * 10.0 + 0.8 * 20.0) / 1.7;
  CHECK(picked[0].x() == doctest::Approx(expected_x).epsilon(1e-12));
  CHECK(picked[0].y() == 0.0);

  // k beyond the list size uses everything.
  const std::vector<Vec2> all = select_topk({cand}, 99);
  const double all_x = (0.9 * 10.0 + 0.8 * 20.0 + 0.1 * 1000.0) / 1.8;
  CHECK(all[0].x() == doctest::Approx(all_x).epsilon(1e-12));

  // Equal confidences: (row, col) ascending decides who makes the cut.
  std::vector<ControlPointProposal> tied(3);
  tied[0] = {2, 0, Vec2(5.0, 0.0), 0.5};
  tied[1] = {0, 1, Vec2(7.0, 0.0), 0.5};
  tied[2] = {0, 0, Vec2(9.0, 0.0), 0.5};
  const std::vector<Vec2> one = select_topk({tied}, 1);
  CHECK(one[0].x() == doctest::Approx(9.0).epsilon(1e-12));  // cell (0,0) wins

  CHECK_THROWS_AS(select_topk({cand}, 0), DimensionMismatch);
  CHECK_THROWS_AS(select_topk({std::vector<ControlPointProposal>{}}, 1),
                  DimensionMismatch);
}

TEST_CASE("confidence target decays with the vote error") {
  CHECK(conf_target(Vec2(0.0, 0.0)) == 1.0);
  CHECK(std::abs(conf_target(Vec2(3.0, 4.0)) - std::exp(-5.0)) < 1e-12);
  CHECK(conf_target(Vec2(-3.0, 4.0)) == conf_target(Vec2(3.0, -4.0)));
  CHECK(conf_target(Vec2(10.0, 0.0)) < conf_target(Vec2(1.0, 0.0)));
}

TEST_CASE("offset and confidence losses match loop oracles") {
  TestRng rng(52);
  const int grid = 3, points = 4;
  const GridPrediction g = random_grid(rng, grid, points);
  std::vector<Vec2> gt;
  for (int p = 0; p < points; ++p) gt.push_back(Vec2(rng.uni(0, 48), rng.uni(0, 48)));

  double expected_p2d = 0.0, expected_conf = 0.0;
  for (int cell = 0; cell < grid * grid; ++cell) {
    const Vec2 center = cell_center(cell / grid, cell % grid);
    for (int p = 0; p < points; ++p) {
      const Vec2 pred = center + g.offsets[g.index(cell, p)];
      const Vec2 delta = pred - gt[p];
      expected_p2d += std::abs(delta.x()) + std::abs(delta.y());
      const double target = std::exp(-delta.norm());
      const double err = g.confidences[g.index(cell, p)] - target;
      expected_conf += err * err;
    }
  }
  CHECK(p2d_loss(g, gt) == doctest::Approx(expected_p2d).epsilon(1e-12));
  CHECK(conf_loss(g, gt) == doctest::Approx(expected_conf).epsilon(1e-12));

  // Perfect offsets: zero regression loss, and confidence loss hits zero
  // exactly when every cell predicts certainty-one targets.
  GridPrediction perfect = GridPrediction::zeros(grid, points);
  std::vector<Vec2> centers_gt(points, Vec2::Zero());
  for (int p = 0; p < points; ++p) centers_gt[p] = cell_center(1, 1);
  for (int cell = 0; cell < grid * grid; ++cell)
    for (int p = 0; p < points; ++p)
      perfect.offsets[perfect.index(cell, p)] =
          centers_gt[p] - cell_center(cell / grid, cell % grid);
  CHECK(p2d_loss(perfect, centers_gt) == 0.0);

  std::vector<Vec2> wrong_count(points + 1, Vec2::Zero());
  CHECK_THROWS_AS(p2d_loss(g, wrong_count), DimensionMismatch);
  CHECK_THROWS_AS(conf_loss(g, wrong_count), DimensionMismatch);
}

TEST_CASE("pose recovery from projected control points") {
  TestRng rng(53);
  const ObjectModel model = ObjectModel::from_extents(80.0, 60.0, 100.0);
  const PerspectiveCamera cam(600.0, 600.0, 256.0, 256.0);
  for (int trial = 0; trial < 20; ++trial) {
    Pose6Dof truth;
    truth.rotation = Rotation3::from_matrix(testsup::random_rotation(rng));
    truth.translation = Vec3(rng.uni(-80, 80), rng.uni(-80, 80), rng.uni(400, 800));
    std::vector<Vec2> pts2d;
    for (const Vec3 &p : model.control_points)
      pts2d.push_back(cam.project(truth.rotation.apply(p) + truth.translation));
    const Pose6Dof got = recover_pose(pts2d, model, cam);
    CHECK(got.rotation.angle_to(truth.rotation) < 1e-6);
    CHECK((got.translation - truth.translation).norm() < 1e-3);
    CHECK(reprojection_error(got, model.control_points, pts2d, cam) < 1e-12);
  }

  std::vector<Vec2> short_list(20, Vec2::Zero());
  CHECK_THROWS_AS(recover_pose(short_list, model, cam), DimensionMismatch);
}

TEST_CASE("mesh distance metric and the tenth-diameter rule") {
  TestRng rng(54);
  const ObjectModel model = ObjectModel::from_extents(50.0, 40.0, 30.0);
  Pose6Dof gt;
  gt.rotation = Rotation3::from_matrix(testsup::random_rotation(rng));
  gt.translation = Vec3(10.0, -20.0, 500.0);

  // Identical poses: zero distance.
  const AddResult same = add_metric(gt, gt, model);
  CHECK(same.mean_distance == 0.0);
  CHECK(same.within_tenth_diameter);

  // A pure translation offset moves every vertex by the same amount.
  const Vec3 shift(3.0, 4.0, 0.0);
  Pose6Dof moved = gt;
  moved.translation += shift;
  const AddResult off = add_metric(moved, gt, model);
  CHECK(off.mean_distance == doctest::Approx(shift.norm()).epsilon(1e-12));

  // Shifting both poses together changes nothing.
  Pose6Dof gt2 = gt, moved2 = moved;
  gt2.translation += Vec3(100, 200, -50);
  moved2.translation += Vec3(100, 200, -50);
  CHECK(add_metric(moved2, gt2, model).mean_distance ==
        doctest::Approx(off.mean_distance).epsilon(1e-12));

  // The acceptance flag is a strict inequality at a tenth of the diameter.
  Pose6Dof at_limit = gt;
  at_limit.translation += Vec3(0.1 * model.diameter, 0.0, 0.0);
  CHECK(!add_metric(at_limit, gt, model).within_tenth_diameter);
  Pose6Dof just_inside = gt;
  just_inside.translation += Vec3(0.1 * model.diameter - 1e-9, 0.0, 0.0);
  CHECK(add_metric(just_inside, gt, model).within_tenth_diameter);
}

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hopose/cr_attention.hpp"
#include "hopose/hand_model.hpp"
#include "hopose/metrics.hpp"
#include "hopose/object_pose.hpp"
#include "hopose/pseudo_filter.hpp"
#include "hopose/synthetic.hpp"

namespace hopose {

inline constexpr int kSchemaVersion = 1;

// Sequence files are JSON lines: a header carrying the schema version,
// sequence id and vertex count, then one frame object per line with
// j2d/j3d/vertices/theta/beta/gt_box arrays of exact lengths. Readers
// throw ParseError with the offending line number.
void write_sequence_jsonl(std::ostream &os, const SequenceRecord &seq);
SequenceRecord read_sequence_jsonl(std::istream &is);
void write_sequence_file(const std::string &path, const SequenceRecord &seq);
SequenceRecord read_sequence_file(const std::string &path);

// Corruption labels, one line per frame after a header line.
void write_labels_jsonl(std::ostream &os, const std::string &sequence_id,
                        const std::vector<FrameLabel> &labels);
std::vector<FrameLabel> read_labels_jsonl(std::istream &is,
                                          std::string *sequence_id = nullptr);
void write_labels_file(const std::string &path, const std::string &sequence_id,
                       const std::vector<FrameLabel> &labels);
std::vector<FrameLabel> read_labels_file(const std::string &path,
                                         std::string *sequence_id = nullptr);

// Filter output: per-frame decisions plus an aggregate summary.
void write_decisions_jsonl(std::ostream &os, const std::string &sequence_id,
                           const std::vector<FilterDecision> &decisions);
void write_decisions_file(const std::string &path, const std::string &sequence_id,
                          const std::vector<FilterDecision> &decisions);
std::string summary_to_json(const FilterSummary &summary);
std::string summary_table(const FilterSummary &summary);

// Hand template as one JSON document.
void write_hand_template_json(std::ostream &os, const HandTemplate &tpl);
HandTemplate read_hand_template_json(std::istream &is);
void write_hand_template_file(const std::string &path, const HandTemplate &tpl);
HandTemplate read_hand_template_file(const std::string &path);

// Object model: either {"extents": [ex, ey, ez]} or {"corners": [[x,y,z] x 8]},
// optional "mesh" list.
ObjectModel read_object_model_json(std::istream &is);
void write_object_model_json(std::ostream &os, const ObjectModel &model);
ObjectModel read_object_model_file(const std::string &path);
void write_object_model_file(const std::string &path, const ObjectModel &model);

// Attention parameters as a flat named-tensor document (name -> shape +
// row-major values), plus the query mode they were trained for.
struct Checkpoint {
  CrParams params;
  QueryMode mode = QueryMode::kObjectQuery;
};
void write_checkpoint_json(std::ostream &os, const Checkpoint &ckpt);
Checkpoint read_checkpoint_json(std::istream &is);
void write_checkpoint_file(const std::string &path, const Checkpoint &ckpt);
Checkpoint read_checkpoint_file(const std::string &path);

// 2D control point observations plus the intrinsics that produced them.
struct PnpProblem {
  PerspectiveCamera camera;
  std::vector<Vec2> points2d;
};
PnpProblem read_pnp_problem_json(std::istream &is);
void write_pnp_problem_json(std::ostream &os, const PnpProblem &problem);
PnpProblem read_pnp_problem_file(const std::string &path);
void write_pnp_problem_file(const std::string &path, const PnpProblem &problem);
std::string pose_to_json(const Pose6Dof &pose, double reproj_error);

// Everything the loss report needs in one fixture document.
struct LossFixture {
  FeatureMap heatmaps_pred, heatmaps_gt;
  ManoTerms mano_pred, mano_gt;
  GridPrediction grid;
  std::vector<Vec2> gt_points2d;
  bool object_visible = true;
};
LossFixture read_loss_fixture_json(std::istream &is);
void write_loss_fixture_json(std::ostream &os, const LossFixture &fixture);
LossFixture read_loss_fixture_file(const std::string &path);
void write_loss_fixture_file(const std::string &path, const LossFixture &fixture);

std::string eval_report_to_json(const EvalReport &report);

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "hopose/geometry.hpp"

namespace hopose {

// Dense H x W x C feature grid. Stored as one row per spatial position
// (row-major, index r * width + col) so attention is plain matrix math.
struct FeatureMap {
  int height = 0, width = 0, channels = 0;
  Eigen::MatrixXd data;  // (height*width) x channels

  static FeatureMap zeros(int h, int w, int c);

  int positions() const { return height * width; }
  double &at(int r, int c, int ch) { return data(r * width + c, ch); }
  double at(int r, int c, int ch) const { return data(r * width + c, ch); }
  bool same_shape(const FeatureMap &o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  void validate() const;
};

// Which feature map plays the query role. kBothQuery runs two
// independently parameterized blocks, one per query map.
enum class QueryMode { kObjectQuery, kHandQuery, kBothQuery };

const char *to_string(QueryMode mode);
QueryMode query_mode_from_string(const std::string &s);

// One attention block: per-position linear Q/K/V maps, scaled dot-product
// attention over positions, residual, then an MLP over layer-normalized
// activations with a second residual. Matrices act on row vectors
// (out = in * W).
struct CrBlockParams {
  Eigen::MatrixXd w_q, w_k, w_v;    // c x c
  Eigen::MatrixXd mlp_w1, mlp_w2;   // c x hidden, hidden x c
  Eigen::RowVectorXd mlp_b1;        // hidden
  Eigen::RowVectorXd mlp_b2;        // c
  Eigen::RowVectorXd ln_gain, ln_bias;  // c

  // hidden <= 0 picks the default expansion of 4 * channels.
  static CrBlockParams zeros(int channels, int hidden = 0);

  int channels() const { return static_cast<int>(w_q.rows()); }
  int hidden() const { return static_cast<int>(mlp_w1.cols()); }
  void validate() const;
};

struct CrParams {
  std::optional<CrBlockParams> object_block;  // query = object features
  std::optional<CrBlockParams> hand_block;    // query = hand features

  // The blocks a mode runs must be present and mutually consistent.
  void validate_for(QueryMode mode) const;
};

// hand/object are the candidate queries; inter (the hand-object overlap
// region features) always provides keys and values.
struct CrInput {
  FeatureMap hand, object, inter;
};

struct CrOutput {
  std::optional<FeatureMap> hand, object;
};

// Everything the backward pass needs, plus enough to re-run the forward
// pass bit-identically (inputs, parameter snapshot, outputs).
struct CrBlockTape {
  Eigen::MatrixXd x, ctx;          // query and context rows
  Eigen::MatrixXd q, k, v;
  Eigen::MatrixXd att_weights;     // softmax rows
  Eigen::MatrixXd qp;              // query + attention
  Eigen::MatrixXd xhat;            // layer-norm normalized rows
  Eigen::VectorXd inv_std;
  Eigen::MatrixXd y;               // layer-norm output
  Eigen::MatrixXd h_pre, h;        // MLP hidden before/after ReLU
};

struct GradTape {
  QueryMode mode = QueryMode::kObjectQuery;
  CrParams params;
  CrInput input;
  std::optional<CrBlockTape> object_tape, hand_tape;
  CrOutput output;
};

// Gradients mirror the parameter / input layout.
struct CrGradients {
  CrParams params;
  CrInput input;
};

// Forward pass. Output maps match their query shapes. Pass a tape to
// record intermediates for cr_backward.
CrOutput cr_forward(const CrParams &params, const CrInput &input, QueryMode mode,
                    GradTape *tape = nullptr);

// Re-runs the forward pass from the tape snapshot.
CrOutput replay_forward(const GradTape &tape);

// Analytic reverse pass. upstream holds d(loss)/d(output) for every map
// the forward produced; gradients of unused inputs come back as zeros.
CrGradients cr_backward(const GradTape &tape, const CrOutput &upstream);

// Row-wise softmax with max subtraction, exposed on its own since the
// attention weights have useful invariances worth testing directly.
Eigen::MatrixXd attention_softmax(const Eigen::MatrixXd &logits);

// Expected pixel coordinate (x = column, y = row) under each channel of
// a heatmap stack. Channels must be non-negative and sum to 1 within
// 1e-6, otherwise NotNormalized.
std::vector<Vec2> soft_argmax_joints(const FeatureMap &heatmaps);

// Unit-sum Gaussian bumps, one channel per center. sigma in pixels.
FeatureMap gaussian_heatmaps(int h, int w, const std::vector<Vec2> &centers,
                             double sigma);

// Squared Frobenius distance summed over channels.
double heatmap_loss(const FeatureMap &pred, const FeatureMap &gt);

// Parameter-space and surface regression targets.
struct ManoTerms {
  Eigen::VectorXd theta, beta;
  std::vector<Vec3> joints3d, vertices;
};

// Sum of squared differences over theta, beta, joints and vertices,
// equally weighted.
double mano_loss(const ManoTerms &pred, const ManoTerms &gt);

double hand_loss(double heatmap_term, double mano_term);
double object_loss(double p2d_term, double conf_term);

// Object supervision only contributes when labels exist for the frame.
double masked_total_loss(double hand_total, double object_total,
                         bool has_object_labels);

}  // namespace hopose

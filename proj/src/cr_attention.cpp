// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/cr_attention.hpp"

#include <cmath>

namespace hopose {

FeatureMap FeatureMap::zeros(int h, int w, int c) {
  FeatureMap m;
  m.height = h;
  m.width = w;
  m.channels = c;
  m.data = Eigen::MatrixXd::Zero(h * w, c);
  return m;
}

void FeatureMap::validate() const {
  if (height <= 0 || width <= 0 || channels <= 0 ||
      data.rows() != height * width || data.cols() != channels) {
    throw DimensionMismatch("feature map: storage does not match declared shape");
  }
  if (!data.allFinite()) throw DimensionMismatch("feature map: non-finite value");
}

const char *to_string(QueryMode mode) {
  switch (mode) {
    case QueryMode::kObjectQuery: return "object";
    case QueryMode::kHandQuery: return "hand";
    case QueryMode::kBothQuery: return "both";
  }
  return "?";
}

QueryMode query_mode_from_string(const std::string &s) {
  if (s == "object") return QueryMode::kObjectQuery;
  if (s == "hand") return QueryMode::kHandQuery;
  if (s == "both") return QueryMode::kBothQuery;
  throw ParseError("unknown query mode '" + s + "'");
}

CrBlockParams CrBlockParams::zeros(int channels, int hidden) {
  if (hidden <= 0) hidden = 4 * channels;
  CrBlockParams p;
  p.w_q = Eigen::MatrixXd::Zero(channels, channels);
  p.w_k = Eigen::MatrixXd::Zero(channels, channels);
  p.w_v = Eigen::MatrixXd::Zero(channels, channels);
  p.mlp_w1 = Eigen::MatrixXd::Zero(channels, hidden);
  p.mlp_w2 = Eigen::MatrixXd::Zero(hidden, channels);
  p.mlp_b1 = Eigen::RowVectorXd::Zero(hidden);
  p.mlp_b2 = Eigen::RowVectorXd::Zero(channels);
  p.ln_gain = Eigen::RowVectorXd::Ones(channels);
  p.ln_bias = Eigen::RowVectorXd::Zero(channels);
  return p;
}

void CrBlockParams::validate() const {
  const int c = channels();
  const int hid = hidden();
  if (c <= 0 || hid <= 0 || w_q.cols() != c || w_k.rows() != c || w_k.cols() != c ||
      w_v.rows() != c || w_v.cols() != c || mlp_w1.rows() != c ||
      mlp_w2.rows() != hid || mlp_w2.cols() != c || mlp_b1.size() != hid ||
      mlp_b2.size() != c || ln_gain.size() != c || ln_bias.size() != c) {
    throw DimensionMismatch("attention block: parameter shapes disagree");
  }
  if (!w_q.allFinite() || !w_k.allFinite() || !w_v.allFinite() ||
      !mlp_w1.allFinite() || !mlp_w2.allFinite() || !mlp_b1.allFinite() ||
      !mlp_b2.allFinite() || !ln_gain.allFinite() || !ln_bias.allFinite()) {
    throw DimensionMismatch("attention block: non-finite parameter");
  }
}

void CrParams::validate_for(QueryMode mode) const {
  const bool need_obj = mode != QueryMode::kHandQuery;
  const bool need_hand = mode != QueryMode::kObjectQuery;
  if (need_obj) {
    if (!object_block) throw DimensionMismatch("attention: object block missing");
    object_block->validate();
  }
  if (need_hand) {
    if (!hand_block) throw DimensionMismatch("attention: hand block missing");
    hand_block->validate();
  }
}

Eigen::MatrixXd attention_softmax(const Eigen::MatrixXd &logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd shifted =
        logits.row(i).array() - logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = shifted.array().exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

namespace {

constexpr double kLnEps = 1e-5;

Eigen::MatrixXd block_forward(const CrBlockParams &p, const Eigen::MatrixXd &x,
                              const Eigen::MatrixXd &ctx, CrBlockTape *tape) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.channels()));
  const Eigen::MatrixXd q = x * p.w_q;
  const Eigen::MatrixXd k = ctx * p.w_k;
  const Eigen::MatrixXd v = ctx * p.w_v;
  const Eigen::MatrixXd a = attention_softmax(q * k.transpose() * scale);
  const Eigen::MatrixXd qp = x + a * v;

  // Layer norm over channels, one row per position.
  const Eigen::Index n = qp.rows(), c = qp.cols();
  Eigen::MatrixXd xhat(n, c);
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = qp.row(i).mean();
    const Eigen::RowVectorXd centered = qp.row(i).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(c);
    inv_std(i) = 1.0 / std::sqrt(var + kLnEps);
    xhat.row(i) = centered * inv_std(i);
  }
  const Eigen::MatrixXd y =
      ((xhat.array().rowwise() * p.ln_gain.array()).rowwise() + p.ln_bias.array())
          .matrix();

  const Eigen::MatrixXd h_pre = (y * p.mlp_w1).rowwise() + p.mlp_b1;
  const Eigen::MatrixXd h = h_pre.cwiseMax(0.0);
  const Eigen::MatrixXd out = qp + ((h * p.mlp_w2).rowwise() + p.mlp_b2);

  if (tape) {
    tape->x = x;
    tape->ctx = ctx;
    tape->q = q;
    tape->k = k;
    tape->v = v;
    tape->att_weights = a;
    tape->qp = qp;
    tape->xhat = xhat;
    tape->inv_std = inv_std;
    tape->y = y;
    tape->h_pre = h_pre;
    tape->h = h;
  }
  return out;
}

// Reverse of block_forward. Returns gradients of the query (dx) and adds
// the context gradient into dctx (both query maps may share the context).
void block_backward(const CrBlockParams &p, const CrBlockTape &t,
                    const Eigen::MatrixXd &dout, CrBlockParams *dp,
                    Eigen::MatrixXd *dx, Eigen::MatrixXd *dctx) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.channels()));

  // MLP branch.
  const Eigen::MatrixXd &dm = dout;
  dp->mlp_w2 += t.h.transpose() * dm;
  dp->mlp_b2 += dm.colwise().sum();
  Eigen::MatrixXd dh = dm * p.mlp_w2.transpose();
  const Eigen::MatrixXd dh_pre =
      ((t.h_pre.array() > 0.0).cast<double>() * dh.array()).matrix();
  dp->mlp_w1 += t.y.transpose() * dh_pre;
  dp->mlp_b1 += dh_pre.colwise().sum();
  const Eigen::MatrixXd dy = dh_pre * p.mlp_w1.transpose();

  // Layer norm.
  const Eigen::Index n = dy.rows();
  const double c = static_cast<double>(dy.cols());
  Eigen::MatrixXd dqp = dout;  // residual path
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd g = dy.row(i).cwiseProduct(p.ln_gain);
    const double m1 = g.mean();
    const double m2 = g.cwiseProduct(t.xhat.row(i)).sum() / c;
    dqp.row(i) += t.inv_std(i) * (g.array() - m1 - t.xhat.row(i).array() * m2).matrix();
  }
  dp->ln_gain += (dy.array() * t.xhat.array()).colwise().sum().matrix();
  dp->ln_bias += dy.colwise().sum();

  // Attention. dqp feeds both the residual (query) and the att product.
  *dx += dqp;
  const Eigen::MatrixXd &datt = dqp;
  const Eigen::MatrixXd da = datt * t.v.transpose();
  const Eigen::MatrixXd dv = t.att_weights.transpose() * datt;
  Eigen::MatrixXd ds(da.rows(), da.cols());
  for (Eigen::Index i = 0; i < da.rows(); ++i) {
    const double dot = da.row(i).dot(t.att_weights.row(i));
    ds.row(i) = t.att_weights.row(i).cwiseProduct(
        (da.row(i).array() - dot).matrix());
  }
  const Eigen::MatrixXd dq = ds * t.k * scale;
  const Eigen::MatrixXd dk = ds.transpose() * t.q * scale;

  dp->w_q += t.x.transpose() * dq;
  *dx += dq * p.w_q.transpose();
  dp->w_k += t.ctx.transpose() * dk;
  *dctx += dk * p.w_k.transpose();
  dp->w_v += t.ctx.transpose() * dv;
  *dctx += dv * p.w_v.transpose();
}

FeatureMap wrap_like(const FeatureMap &shape, Eigen::MatrixXd data) {
  FeatureMap m;
  m.height = shape.height;
  m.width = shape.width;
  m.channels = shape.channels;
  m.data = std::move(data);
  return m;
}

void check_block_input(const CrBlockParams &p, const FeatureMap &query,
                       const FeatureMap &ctx) {
  query.validate();
  ctx.validate();
  if (query.channels != p.channels() || ctx.channels != p.channels()) {
    throw DimensionMismatch("attention: channel count of inputs and block disagree");
  }
}

}  // namespace

CrOutput cr_forward(const CrParams &params, const CrInput &input, QueryMode mode,
                    GradTape *tape) {
  params.validate_for(mode);

  CrOutput out;
  CrBlockTape obj_tape, hand_tape;
  const bool want_tape = tape != nullptr;
  if (mode != QueryMode::kHandQuery) {
    check_block_input(*params.object_block, input.object, input.inter);
    out.object = wrap_like(
        input.object,
        block_forward(*params.object_block, input.object.data, input.inter.data,
                      want_tape ? &obj_tape : nullptr));
  }
  if (mode != QueryMode::kObjectQuery) {
    check_block_input(*params.hand_block, input.hand, input.inter);
    out.hand = wrap_like(
        input.hand,
        block_forward(*params.hand_block, input.hand.data, input.inter.data,
                      want_tape ? &hand_tape : nullptr));
  }

  if (tape) {
    tape->mode = mode;
    tape->params = params;
    tape->input = input;
    if (out.object) tape->object_tape = std::move(obj_tape);
    if (out.hand) tape->hand_tape = std::move(hand_tape);
    tape->output = out;
  }
  return out;
}

CrOutput replay_forward(const GradTape &tape) {
  return cr_forward(tape.params, tape.input, tape.mode, nullptr);
}

namespace {

FeatureMap zeros_like(const FeatureMap &m) {
  FeatureMap z;
  z.height = m.height;
  z.width = m.width;
  z.channels = m.channels;
  z.data = Eigen::MatrixXd::Zero(m.data.rows(), m.data.cols());
  return z;
}

}  // namespace

CrGradients cr_backward(const GradTape &tape, const CrOutput &upstream) {
  CrGradients g;
  g.input.hand = zeros_like(tape.input.hand);
  g.input.object = zeros_like(tape.input.object);
  g.input.inter = zeros_like(tape.input.inter);

  if (tape.object_tape) {
    if (!upstream.object || !upstream.object->same_shape(*tape.output.object)) {
      throw DimensionMismatch("cr_backward: upstream object gradient missing or misshaped");
    }
    const CrBlockParams &p = *tape.params.object_block;
    CrBlockParams dp = CrBlockParams::zeros(p.channels(), p.hidden());
    dp.ln_gain.setZero();
    block_backward(p, *tape.object_tape, upstream.object->data, &dp,
                   &g.input.object.data, &g.input.inter.data);
    g.params.object_block = std::move(dp);
  }
  if (tape.hand_tape) {
    if (!upstream.hand || !upstream.hand->same_shape(*tape.output.hand)) {
      throw DimensionMismatch("cr_backward: upstream hand gradient missing or misshaped");
    }
    const CrBlockParams &p = *tape.params.hand_block;
    CrBlockParams dp = CrBlockParams::zeros(p.channels(), p.hidden());
    dp.ln_gain.setZero();
    block_backward(p, *tape.hand_tape, upstream.hand->data, &dp,
                   &g.input.hand.data, &g.input.inter.data);
    g.params.hand_block = std::move(dp);
  }
  return g;
}

std::vector<Vec2> soft_argmax_joints(const FeatureMap &heatmaps) {
  heatmaps.validate();
  std::vector<Vec2> out(heatmaps.channels, Vec2::Zero());
  for (int ch = 0; ch < heatmaps.channels; ++ch) {
    double sum = 0.0;
    Vec2 acc = Vec2::Zero();
    for (int r = 0; r < heatmaps.height; ++r) {
      for (int c = 0; c < heatmaps.width; ++c) {
        const double p = heatmaps.at(r, c, ch);
        if (p < -1e-12) {
          throw NotNormalized("soft_argmax: negative mass in channel " +
                              std::to_string(ch));
        }
        sum += p;
        acc += p * Vec2(c, r);
      }
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw NotNormalized("soft_argmax: channel " + std::to_string(ch) +
                          " sums to " + std::to_string(sum));
    }
    out[ch] = acc;
  }
  return out;
}

FeatureMap gaussian_heatmaps(int h, int w, const std::vector<Vec2> &centers,
                             double sigma) {
  FeatureMap m = FeatureMap::zeros(h, w, static_cast<int>(centers.size()));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int ch = 0; ch < m.channels; ++ch) {
    double sum = 0.0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double d2 = (Vec2(c, r) - centers[ch]).squaredNorm();
        const double val = std::exp(-d2 * inv);
        m.at(r, c, ch) = val;
        sum += val;
      }
    }
    if (sum <= 0.0) {
      throw NotNormalized("gaussian_heatmaps: center lies too far outside the map");
    }
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) m.at(r, c, ch) /= sum;
    }
  }
  return m;
}

double heatmap_loss(const FeatureMap &pred, const FeatureMap &gt) {
  if (!pred.same_shape(gt)) throw DimensionMismatch("heatmap_loss: shape mismatch");
  return (pred.data - gt.data).squaredNorm();
}

double mano_loss(const ManoTerms &pred, const ManoTerms &gt) {
  if (pred.theta.size() != gt.theta.size() || pred.beta.size() != gt.beta.size() ||
      pred.joints3d.size() != gt.joints3d.size() ||
      pred.vertices.size() != gt.vertices.size()) {
    throw DimensionMismatch("mano_loss: term sizes disagree");
  }
  double loss = (pred.theta - gt.theta).squaredNorm() +
                (pred.beta - gt.beta).squaredNorm();
  for (size_t i = 0; i < pred.joints3d.size(); ++i) {
    loss += (pred.joints3d[i] - gt.joints3d[i]).squaredNorm();
  }
  for (size_t i = 0; i < pred.vertices.size(); ++i) {
    loss += (pred.vertices[i] - gt.vertices[i]).squaredNorm();
  }
  return loss;
}

double hand_loss(double heatmap_term, double mano_term) {
  return 0.1 * heatmap_term + mano_term;
}

double object_loss(double p2d_term, double conf_term) {
  return 0.5 * p2d_term + 0.1 * conf_term;
}

double masked_total_loss(double hand_total, double object_total,
                         bool has_object_labels) {
  return hand_total + (has_object_labels ? object_total : 0.0);
}

}  // namespace hopose

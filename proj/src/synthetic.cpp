// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hopose/errors.hpp"
#include "hopose/hand_model.hpp"

namespace hopose {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

// Catmull-Rom through the keys with clamped ends, x01 in [0, 1].
double spline_at(const std::vector<double> &keys, double x01) {
  const int segs = static_cast<int>(keys.size()) - 1;
  if (segs <= 0) return keys.front();
  const double x = x01 * segs;
  const int i = std::clamp(static_cast<int>(x), 0, segs - 1);
  const double u = x - i;
  const double p1 = keys[i];
  const double p2 = keys[i + 1];
  const double p0 = i > 0 ? keys[i - 1] : p1;
  const double p3 = i + 2 <= segs ? keys[i + 2] : p2;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return 0.5 * (2.0 * p1 + (-p0 + p2) * u +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3);
}

int finger_of_joint(int joint) { return (joint - 1) / 4; }

}  // namespace

double Rng::uniform() {
  // 53 high bits, same construction everywhere the library needs a double.
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_cache_) {
    has_cache_ = false;
    return cache_;
  }
  double u1 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * uniform();
  cache_ = r * std::sin(a);
  has_cache_ = true;
  return r * std::cos(a);
}

int Rng::uniform_int(int n) {
  const int v = static_cast<int>(uniform() * n);
  return std::min(v, n - 1);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const char *to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::kJitter2D:
      return "jitter2d";
    case NoiseMode::kThetaJump:
      return "theta_jump";
    case NoiseMode::kAngleViolation:
      return "angle_violation";
    case NoiseMode::kShapeDrift:
      return "shape_drift";
    case NoiseMode::kBoxShift:
      return "box_shift";
  }
  return "unknown";
}

NoiseMode noise_mode_from_string(const std::string &s) {
  for (int i = 0; i < kNumNoiseModes; ++i) {
    const NoiseMode m = static_cast<NoiseMode>(i);
    if (s == to_string(m)) return m;
  }
  throw ParseError("unknown noise mode '" + s + "'");
}

void SynthConfig::validate() const {
  if (sequences < 1 || frames < 1 || keyframes < 2)
    throw Error("synthetic config needs sequences >= 1, frames >= 1, keyframes >= 2");
  if (!(max_theta_step > 0.0)) throw Error("max_theta_step must be positive");
  const double r[] = {rates.jitter2d, rates.theta_jump, rates.angle_violation,
                      rates.shape_drift, rates.box_shift};
  for (double v : r)
    if (!(v >= 0.0 && v <= 1.0)) throw Error("noise rates must lie in [0, 1]");
  if (jitter2d_sigma < 0.0 || theta_jump_mag < 0.0 || shape_drift_mag < 0.0 ||
      box_shift_frac < 0.0)
    throw Error("noise magnitudes must be non-negative");
}

SyntheticSequence generate_sequence(const HandTemplate &tpl, const SynthConfig &cfg,
                                    int sequence_index) {
  cfg.validate();
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(sequence_index)));

  Eigen::Matrix<double, kBetaDim, 1> beta;
  for (int i = 0; i < kBetaDim; ++i) beta(i) = std::clamp(rng.normal() * 0.3, -0.9, 0.9);

  const double cam_scale = rng.uniform(1.0, 1.4);

  // One scalar track per degree of freedom: three for the global rotation,
  // one flexion angle per articulated finger joint.
  const int channels = 3 + (kNumArticulated - 1);
  std::vector<std::vector<double>> keys(channels, std::vector<double>(cfg.keyframes));
  for (int c = 0; c < channels; ++c)
    for (int k = 0; k < cfg.keyframes; ++k)
      keys[c][k] = c < 3 ? rng.uniform(-0.3, 0.3) : rng.uniform(5.0 * kDeg, 85.0 * kDeg);

  const int n = cfg.frames;
  Eigen::MatrixXd traj = Eigen::MatrixXd::Zero(n, kThetaDim);
  for (int t = 0; t < n; ++t) {
    const double x01 = n > 1 ? static_cast<double>(t) / (n - 1) : 0.0;
    for (int c = 0; c < 3; ++c) traj(t, c) = spline_at(keys[c], x01);
    for (int a = 1; a < kNumArticulated; ++a) {
      // Clamp spline overshoot back into the open flexion range.
      const double phi = std::clamp(spline_at(keys[2 + a], x01), 5.5 * kDeg, 84.5 * kDeg);
      const Vec3 axis = standard_flexion_axis(finger_of_joint(kArticulated[a]));
      traj.block<1, 3>(t, 3 * a) = (axis * phi).transpose();
    }
  }

  // Shrink the motion about its time mean until no frame-to-frame step
  // exceeds the cap. Flexion channels stay inside their range because the
  // mean of in-range values is in range.
  double max_step = 0.0;
  for (int t = 0; t + 1 < n; ++t)
    max_step = std::max(max_step, (traj.row(t + 1) - traj.row(t)).norm());
  if (max_step > cfg.max_theta_step) {
    const double s = cfg.max_theta_step / max_step;
    const Eigen::RowVectorXd mean = traj.colwise().mean();
    traj = ((s * traj).rowwise() + (1.0 - s) * mean).eval();
  }

  // Fixed camera that roughly centers the mid-sequence pose.
  HandParams mid_params;
  mid_params.theta = traj.row(n / 2).transpose();
  mid_params.beta = beta;
  const HandOutput mid_out = forward_kinematics(tpl, mid_params);
  Vec2 centroid = Vec2::Zero();
  for (const Vec3 &j : mid_out.joints3d) centroid += j.head<2>();
  centroid /= static_cast<double>(mid_out.joints3d.size());
  const WeakPerspectiveCamera camera(cam_scale, Vec2(256.0, 256.0) - cam_scale * centroid);

  SyntheticSequence out;
  char idbuf[16];
  std::snprintf(idbuf, sizeof idbuf, "seq%03d", sequence_index);
  out.truth.sequence_id = idbuf;
  out.observed.sequence_id = idbuf;
  out.camera = camera;
  out.truth.frames.reserve(n);
  out.observed.frames.reserve(n);
  out.labels.reserve(n);

  for (int t = 0; t < n; ++t) {
    HandParams params;
    params.theta = traj.row(t).transpose();
    params.beta = beta;
    const HandOutput fk = forward_kinematics(tpl, params);

    FrameRecord clean;
    clean.frame_index = t;
    clean.prediction.params = params;
    clean.prediction.j3d = fk.joints3d;
    clean.prediction.vertices = fk.vertices;
    clean.prediction.j2d.reserve(fk.joints3d.size());
    for (const Vec3 &j : fk.joints3d) clean.prediction.j2d.push_back(camera.project(j));
    std::vector<Vec2> mesh2d;
    mesh2d.reserve(fk.vertices.size());
    for (const Vec3 &v : fk.vertices) mesh2d.push_back(camera.project(v));
    clean.gt_hand_box = bbox_of_points(mesh2d);

    FrameRecord obs = clean;
    FrameLabel label;
    label.frame_index = t;

    // Frame 0 is never corrupted: the first frame of a track anchors the
    // temporal screen and has nothing earlier to be checked against.
    if (t > 0) {
      const bool do_jitter = rng.uniform() < cfg.rates.jitter2d;
      const bool do_jump = rng.uniform() < cfg.rates.theta_jump;
      const bool do_angle = rng.uniform() < cfg.rates.angle_violation;
      const bool do_shape = rng.uniform() < cfg.rates.shape_drift;
      const bool do_box = rng.uniform() < cfg.rates.box_shift;

      if (do_jump) {
        Eigen::Matrix<double, kThetaDim, 1> dir;
        for (int i = 0; i < kThetaDim; ++i) dir(i) = rng.normal();
        dir.normalize();
        obs.prediction.params.theta += cfg.theta_jump_mag * dir;
        label.modes.push_back(NoiseMode::kThetaJump);
      }
      if (do_angle) {
        const int a = 1 + rng.uniform_int(kNumArticulated - 1);
        const double phi = rng.uniform(100.0 * kDeg, 150.0 * kDeg);
        const Vec3 axis = standard_flexion_axis(finger_of_joint(kArticulated[a]));
        obs.prediction.params.theta.segment<3>(3 * a) = axis * phi;
        // Re-pose so the bent joint shows up in 3d and in the image, but
        // keep the clean box: the detector crop is not what went wrong here.
        HandParams bent = obs.prediction.params;
        bent.beta = beta;
        const HandOutput bent_fk = forward_kinematics(tpl, bent);
        obs.prediction.j3d = bent_fk.joints3d;
        obs.prediction.vertices = bent_fk.vertices;
        for (std::size_t i = 0; i < obs.prediction.j2d.size(); ++i)
          obs.prediction.j2d[i] = camera.project(bent_fk.joints3d[i]);
        label.modes.push_back(NoiseMode::kAngleViolation);
      }
      if (do_shape) {
        Eigen::Matrix<double, kBetaDim, 1> dir;
        for (int i = 0; i < kBetaDim; ++i) dir(i) = rng.normal();
        dir.normalize();
        obs.prediction.params.beta += cfg.shape_drift_mag * dir;
        label.modes.push_back(NoiseMode::kShapeDrift);
      }
      if (do_jitter) {
        for (Vec2 &p : obs.prediction.j2d) {
          p.x() += cfg.jitter2d_sigma * rng.normal();
          p.y() += cfg.jitter2d_sigma * rng.normal();
        }
        label.modes.push_back(NoiseMode::kJitter2D);
      }
      if (do_box) {
        const double w = obs.gt_hand_box.width();
        const double h = obs.gt_hand_box.height();
        const double sx = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double sy = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const Vec2 shift(sx * cfg.box_shift_frac * w, sy * cfg.box_shift_frac * h);
        obs.gt_hand_box = Box2(obs.gt_hand_box.min + shift, obs.gt_hand_box.max + shift);
        label.modes.push_back(NoiseMode::kBoxShift);
      }
      std::sort(label.modes.begin(), label.modes.end(),
                [](NoiseMode x, NoiseMode y) {
                  return static_cast<int>(x) < static_cast<int>(y);
                });
    }

    label.corrupted = !label.modes.empty();
    out.truth.frames.push_back(std::move(clean));
    out.observed.frames.push_back(std::move(obs));
    out.labels.push_back(std::move(label));
  }
  return out;
}

std::vector<SyntheticSequence> generate_corpus(const HandTemplate &tpl,
                                               const SynthConfig &cfg) {
  cfg.validate();
  std::vector<SyntheticSequence> out;
  out.reserve(static_cast<std::size_t>(cfg.sequences));
  for (int i = 0; i < cfg.sequences; ++i) out.push_back(generate_sequence(tpl, cfg, i));
  return out;
}

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hopose/pseudo_filter.hpp"

namespace hopose {

// mt19937_64 plus hand-written distributions. The standard distribution
// objects are implementation-defined, which would break byte-identical
// output across toolchains; these are fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // standard normal, Box-Muller
  int uniform_int(int n);  // [0, n)

 private:
  std::mt19937_64 eng_;
  bool has_cache_ = false;
  double cache_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class NoiseMode { kJitter2D, kThetaJump, kAngleViolation, kShapeDrift, kBoxShift };

inline constexpr int kNumNoiseModes = 5;

const char *to_string(NoiseMode m);
NoiseMode noise_mode_from_string(const std::string &s);

struct NoiseRates {
  double jitter2d = 0.0;
  double theta_jump = 0.0;
  double angle_violation = 0.0;
  double shape_drift = 0.0;
  double box_shift = 0.0;
};

struct SynthConfig {
  int sequences = 1;
  int frames = 100;
  int keyframes = 5;
  std::uint64_t seed = 1;

  // Pose motion is rescaled so consecutive frames never move theta by
  // more than this (l2, radians); keeps clean sequences temporally tame.
  double max_theta_step = 0.0015;

  NoiseRates rates;
  double jitter2d_sigma = 240.0;  // px, has to bury the reprojection bound
  double theta_jump_mag = 0.2;    // radians l2 across all joints
  double shape_drift_mag = 1.0;   // beta units l2
  double box_shift_frac = 0.35;   // fraction of box width/height

  void validate() const;
};

struct FrameLabel {
  std::int64_t frame_index = 0;
  bool corrupted = false;
  std::vector<NoiseMode> modes;
};

struct SyntheticSequence {
  SequenceRecord truth;     // clean ground truth
  SequenceRecord observed;  // corruptions baked in
  std::vector<FrameLabel> labels;
  WeakPerspectiveCamera camera;
};

// One sequence: fixed shape and camera, smooth keyframed articulation
// (flexions drawn in (5, 85) degrees), then per-frame corruption draws.
// Deterministic in (config.seed, sequence_index).
SyntheticSequence generate_sequence(const HandTemplate &tpl, const SynthConfig &cfg,
                                    int sequence_index);

std::vector<SyntheticSequence> generate_corpus(const HandTemplate &tpl,
                                               const SynthConfig &cfg);

}  // namespace hopose

// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

// Release gate: ten numbered checks over the library and the command
// line tool, one printed line each. Usage: acceptance <path-to-cli>.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hopose/cr_attention.hpp"
#include "hopose/frame_io.hpp"
#include "hopose/geometry.hpp"
#include "hopose/hand_model.hpp"
#include "hopose/metrics.hpp"
#include "hopose/object_pose.hpp"
#include "hopose/pseudo_filter.hpp"
#include "hopose/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hopose;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return std::string(buf);
}

// Self-contained randomness, independent of the library's generator.
struct ARng {
  std::mt19937_64 eng;
  explicit ARng(std::uint64_t seed) : eng(seed) {}
  double uni() { return (eng() >> 11) * 0x1.0p-53; }
  double uni(double lo, double hi) { return lo + (hi - lo) * uni(); }
  double gauss() {
    double u = uni(), v = uni();
    while (u <= 0.0) u = uni();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
  }
  Vec3 vec3(double s) { return Vec3(s * gauss(), s * gauss(), s * gauss()); }
};

Mat3 rodrigues(const Vec3 &aa) {
  const double angle = aa.norm();
  if (angle < 1e-14) return Mat3::Identity();
  const Vec3 k = aa / angle;
  Mat3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return std::cos(angle) * Mat3::Identity() + std::sin(angle) * kx +
         (1.0 - std::cos(angle)) * (k * k.transpose());
}

Mat3 random_rotation(ARng &rng) {
  Vec3 axis = rng.vec3(1.0);
  while (axis.norm() < 1e-6) axis = rng.vec3(1.0);
  axis.normalize();
  return rodrigues(axis * rng.uni(1e-3, 0.9 * kPi));
}

int run_cmd(const std::string &cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- 1: weak-perspective camera fit --------------------------------------

Outcome check_camera_fit() {
  ARng rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double s = rng.uni(0.2, 3.0);
    const Vec2 t(rng.uni(-200, 200), rng.uni(-200, 200));
    const WeakPerspectiveCamera cam(s, t);
    std::vector<Vec3> j3d;
    std::vector<Vec2> j2d;
    for (int i = 0; i < 21; ++i) {
      j3d.push_back(rng.vec3(60.0));
      j2d.push_back(cam.project(j3d.back()));
    }
    const WeakPerspectiveCamera fit = fit_weak_camera(j3d, j2d);
    worst = std::max({worst, std::abs(fit.s - s), std::abs(fit.t.x() - t.x()),
                      std::abs(fit.t.y() - t.y())});
  }
  const double dt = elapsed_s(t0);
  const bool pass = worst < 1e-8 && dt < 1.0;
  return {pass, fmt("1000 fits, max component error %.2e (need < 1e-8), %.2fs (need < 1s)",
                    worst, dt)};
}

// ---- 2: pnp accuracy ------------------------------------------------------

Outcome check_pnp() {
  ARng rng(102);
  const ObjectModel box = ObjectModel::from_extents(100.0, 100.0, 100.0);
  const PerspectiveCamera cam(600.0, 600.0, 256.0, 256.0);
  const auto t0 = Clock::now();

  double worst_rot = 0.0, worst_trans = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Pose6Dof truth;
    truth.rotation = Rotation3::from_matrix(random_rotation(rng));
    truth.translation = Vec3(rng.uni(-50, 50), rng.uni(-50, 50), rng.uni(400, 800));
    std::vector<Vec2> pts2d;
    for (const Vec3 &p : box.control_points)
      pts2d.push_back(cam.project(truth.rotation.apply(p) + truth.translation));
    const Pose6Dof got = solve_pnp(box.control_points, pts2d, cam);
    worst_rot = std::max(worst_rot, got.rotation.angle_to(truth.rotation));
    worst_trans = std::max(worst_trans, (got.translation - truth.translation).norm());
  }

  std::vector<double> noisy_trans;
  for (int trial = 0; trial < 500; ++trial) {
    Pose6Dof truth;
    truth.rotation = Rotation3::from_matrix(random_rotation(rng));
    truth.translation = Vec3(rng.uni(-50, 50), rng.uni(-50, 50), rng.uni(400, 800));
    std::vector<Vec2> pts2d;
    for (const Vec3 &p : box.control_points) {
      Vec2 uv = cam.project(truth.rotation.apply(p) + truth.translation);
      uv += Vec2(0.5 * rng.gauss(), 0.5 * rng.gauss());
      pts2d.push_back(uv);
    }
    Pose6Dof got;
    try {
      got = solve_pnp(box.control_points, pts2d, cam);
    } catch (const PnpNotConverged &e) {
      got = e.best_pose();
    }
    noisy_trans.push_back((got.translation - truth.translation).norm());
  }
  std::sort(noisy_trans.begin(), noisy_trans.end());
  const double median = noisy_trans[noisy_trans.size() / 2];
  const double dt = elapsed_s(t0);

  const bool pass =
      worst_rot < 1e-6 && worst_trans < 1e-3 && median < 5.0 && dt < 10.0;
  return {pass,
          fmt("noiseless max rot %.2e rad (< 1e-6), trans %.2e mm (< 1e-3); "
              "0.5px-noise median trans %.3f mm (< 5); %.1fs (< 10s)",
              worst_rot, worst_trans, median, dt)};
}

// ---- 3: gradient check through the CLI ------------------------------------

Outcome check_gradcheck(const std::string &cli, const fs::path &tmp) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const char *mode : {"object", "hand", "both"}) {
    const fs::path out = tmp / (std::string("gradcheck_") + mode + ".json");
    const std::string cmd = cli + " gradcheck --mode " + mode +
                            " --height 8 --width 8 --channels 32 --seed 7 --out " +
                            out.string() + " > /dev/null 2>&1";
    const int rc = run_cmd(cmd);
    if (rc != 0) return {false, fmt("mode %s exited with code %d", mode, rc)};
    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    if (!j["pass"].get<bool>())
      return {false, fmt("mode %s reported failure", mode)};
    worst = std::max(worst, j["max_rel_error"].get<double>());
  }
  const double dt = elapsed_s(t0);
  const bool pass = worst < 1e-4 && dt < 60.0;
  return {pass, fmt("8x8x32, 3 modes, max rel error %.2e (< 1e-4), %.1fs (< 60s)",
                    worst, dt)};
}

// ---- 4: softmax rows and residual identity ---------------------------------

Outcome check_softmax_identity() {
  ARng rng(104);
  double worst = 0.0;
  Eigen::MatrixXd logits(203, 64);
  for (Eigen::Index i = 0; i < 200; ++i)
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      logits(i, j) = 30.0 * rng.gauss();
  logits.row(200).setConstant(1e8);
  logits.row(201).setConstant(-1e8);
  logits.row(202).setLinSpaced(64, -1e6, 1e6);
  const Eigen::MatrixXd sm = attention_softmax(logits);
  for (Eigen::Index i = 0; i < sm.rows(); ++i)
    worst = std::max(worst, std::abs(sm.row(i).sum() - 1.0));

  bool identity = true;
  for (int trial = 0; trial < 3; ++trial) {
    const int c = 6;
    CrBlockParams p = CrBlockParams::zeros(c);
    auto fill = [&rng](Eigen::MatrixXd &m, double s) {
      for (Eigen::Index i = 0; i < m.size(); ++i) *(m.data() + i) = s * rng.gauss();
    };
    fill(p.w_q, 0.5);
    fill(p.w_k, 0.5);
    fill(p.mlp_w1, 0.5);
    for (Eigen::Index i = 0; i < p.mlp_b1.size(); ++i) p.mlp_b1[i] = rng.gauss();
    // value and mlp output paths stay zero
    CrParams params;
    params.object_block = p;
    CrInput input;
    input.object = FeatureMap::zeros(4, 5, c);
    input.hand = FeatureMap::zeros(2, 2, c);
    input.inter = FeatureMap::zeros(3, 3, c);
    for (Eigen::Index i = 0; i < input.object.data.size(); ++i)
      *(input.object.data.data() + i) = rng.gauss();
    for (Eigen::Index i = 0; i < input.inter.data.size(); ++i)
      *(input.inter.data.data() + i) = rng.gauss();
    const CrOutput out = cr_forward(params, input, QueryMode::kObjectQuery);
    identity = identity && (out.object->data == input.object.data);
  }

  const bool pass = worst <= 1e-12 && identity;
  return {pass, fmt("row-sum deviation %.2e (<= 1e-12), zero-weight identity %s",
                    worst, identity ? "bit-exact" : "BROKEN")};
}

// ---- 5: pinned loss values --------------------------------------------------

Outcome check_loss_values() {
  const bool hand_ok = hand_loss(10.0, 1.0) == 2.0;
  const bool object_ok = object_loss(2.0, 10.0) == 2.0;
  const bool mask_ok = masked_total_loss(1.0, 2.0, false) == 1.0 &&
                       masked_total_loss(1.0, 2.0, true) == 3.0;
  const double conf_err = std::abs(conf_target(Vec2(3.0, 4.0)) - std::exp(-5.0));
  const bool conf_ok = conf_err <= 1e-12;
  const bool pass = hand_ok && object_ok && mask_ok && conf_ok;
  return {pass,
          fmt("hand(10,1)=%.1f object(2,10)=%.1f masked(1,2,off)=%.1f "
              "conf(3,4) err %.1e (<= 1e-12)",
              hand_loss(10.0, 1.0), object_loss(2.0, 10.0),
              masked_total_loss(1.0, 2.0, false), conf_err)};
}

// ---- 6: corpus screening quality --------------------------------------------

Outcome check_filter_corpus() {
  const HandTemplate tpl = HandTemplate::standard();
  const auto t0 = Clock::now();

  SynthConfig cfg;
  cfg.sequences = 50;
  cfg.frames = 100;
  cfg.seed = 2026;
  cfg.rates.jitter2d = 0.045;
  cfg.rates.theta_jump = 0.045;
  cfg.rates.angle_violation = 0.045;
  cfg.rates.shape_drift = 0.045;
  cfg.rates.box_shift = 0.045;

  const FilterConfig fcfg;
  std::int64_t tp = 0, fp = 0, fn = 0, corrupted = 0, total = 0;
  for (const SyntheticSequence &s : generate_corpus(tpl, cfg)) {
    const auto decisions = filter_sequence(s.observed, tpl, fcfg);
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      ++total;
      const bool rejected = !decisions[i].accepted;
      if (s.labels[i].corrupted) ++corrupted;
      if (rejected && s.labels[i].corrupted) ++tp;
      else if (rejected && !s.labels[i].corrupted) ++fp;
      else if (!rejected && s.labels[i].corrupted) ++fn;
    }
  }
  const double precision = tp / std::max(1.0, double(tp + fp));
  const double recall = tp / std::max(1.0, double(tp + fn));

  SynthConfig clean = cfg;
  clean.rates = NoiseRates{};
  clean.sequences = 5;
  clean.frames = 60;
  std::int64_t clean_total = 0, clean_accepted = 0;
  for (const SyntheticSequence &s : generate_corpus(tpl, clean)) {
    for (const FilterDecision &d : filter_sequence(s.observed, tpl, fcfg)) {
      ++clean_total;
      if (d.accepted) ++clean_accepted;
    }
  }
  const double dt = elapsed_s(t0);

  const bool pass = total >= 5000 && precision >= 0.95 && recall >= 0.80 &&
                    clean_accepted == clean_total && dt < 30.0;
  return {pass,
          fmt("%lld frames (%.1f%% corrupted): precision %.3f (>= 0.95), recall "
              "%.3f (>= 0.80); clean corpus %lld/%lld kept; %.1fs (< 30s)",
              static_cast<long long>(total), 100.0 * corrupted / double(total),
              precision, recall, static_cast<long long>(clean_accepted),
              static_cast<long long>(clean_total), dt)};
}

// ---- 7: threshold monotonicity ----------------------------------------------

Outcome check_threshold_monotonicity() {
  const HandTemplate tpl = HandTemplate::standard();
  const FilterConfig base;

  std::vector<std::pair<const char *, FilterConfig>> loosened;
  auto add = [&loosened](const char *name, FilterConfig cfg) {
    loosened.emplace_back(name, cfg);
  };
  {
    FilterConfig c = base;
    c.iou_min = 0.4;
    add("iou", c);
  }
  {
    FilterConfig c = base;
    c.reproj_max = 1.0;
    add("reproj", c);
  }
  {
    FilterConfig c = base;
    c.bone_min = 0.05;
    add("bone", c);
  }
  {
    FilterConfig c = base;
    c.angle_max_deg = 120.0;
    add("angle", c);
  }
  {
    FilterConfig c = base;
    c.smooth2d_max = 0.8;
    add("smooth2d", c);
  }
  {
    FilterConfig c = base;
    c.smooth_theta_max = 0.05;
    add("smooth_theta", c);
  }
  {
    FilterConfig c = base;
    c.shape_sigma_mult = 3.0;
    add("shape", c);
  }

  int comparisons = 0, regressions = 0;
  std::string first_bad;
  for (int corpus = 0; corpus < 20; ++corpus) {
    SynthConfig cfg;
    cfg.sequences = 5;
    cfg.frames = 60;
    cfg.seed = 300 + static_cast<std::uint64_t>(corpus);
    cfg.rates.jitter2d = 0.045;
    cfg.rates.theta_jump = 0.045;
    cfg.rates.angle_violation = 0.045;
    cfg.rates.shape_drift = 0.045;
    cfg.rates.box_shift = 0.045;
    const std::vector<SyntheticSequence> corpus_data = generate_corpus(tpl, cfg);

    auto accepted_count = [&](const FilterConfig &fc) {
      std::int64_t n = 0;
      for (const SyntheticSequence &s : corpus_data)
        for (const FilterDecision &d : filter_sequence(s.observed, tpl, fc))
          if (d.accepted) ++n;
      return n;
    };
    const std::int64_t baseline = accepted_count(base);
    for (const auto &[name, fc] : loosened) {
      ++comparisons;
      if (accepted_count(fc) < baseline) {
        ++regressions;
        if (first_bad.empty()) first_bad = fmt(" (first: %s, corpus %d)", name, corpus);
      }
    }
  }
  const bool pass = regressions == 0;
  return {pass, fmt("7 thresholds x 20 corpora: %d comparisons, %d lost frames "
                    "after loosening%s",
                    comparisons, regressions, first_bad.c_str())};
}

// ---- 8: evaluation metric identities ----------------------------------------

Outcome check_metrics() {
  ARng rng(108);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> gt, pred;
    for (int i = 0; i < 20; ++i) {
      gt.push_back(rng.vec3(40.0));
      pred.push_back(gt.back() + rng.vec3(3.0));
    }
    const double base = aligned_error(pred, gt);
    const double scale = rng.uni(0.2, 5.0);
    const Mat3 rot = random_rotation(rng);
    const Vec3 shift = rng.vec3(100.0);
    std::vector<Vec3> moved;
    for (const Vec3 &p : pred) moved.push_back(scale * (rot * p) + shift);
    worst = std::max(worst, std::abs(aligned_error(moved, gt) - base));
  }

  std::vector<Vec3> cloud;
  for (int i = 0; i < 30; ++i) cloud.push_back(rng.vec3(30.0));
  const FScore perfect = f_score(cloud, cloud, 5.0);
  const double auc = pck_auc(std::vector<double>(100, 0.0));

  const bool pass = worst <= 1e-9 && perfect.f == 1.0 && auc == 1.0;
  return {pass, fmt("similarity drift %.2e (<= 1e-9) over 50 clouds, "
                    "perfect f-score %.1f, zero-error auc %.1f",
                    worst, perfect.f, auc)};
}

// ---- 9: kinematics against an explicit-matrix oracle -------------------------

Outcome check_fk_oracle() {
  const HandTemplate tpl = HandTemplate::standard();
  ARng rng(109);
  double worst = 0.0;

  for (int trial = 0; trial < 1000; ++trial) {
    HandParams params;
    for (int i = 0; i < kThetaDim; ++i) params.theta[i] = 0.4 * rng.gauss();
    for (int i = 0; i < kBetaDim; ++i) params.beta[i] = 0.3 * rng.gauss();

    std::vector<Vec3> shaped(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
      shaped[j] = tpl.rest_joints[j];
      for (int k = 0; k < kBetaDim; ++k)
        shaped[j] += params.beta[k] * tpl.shape_dirs[j][k];
    }
    std::array<Mat3, kNumJoints> local;
    for (int j = 0; j < kNumJoints; ++j) local[j] = Mat3::Identity();
    for (int a = 0; a < kNumArticulated; ++a)
      local[kArticulated[a]] = rodrigues(params.joint_rotation(a));

    std::vector<Eigen::Matrix4d> world(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
      Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
      m.topLeftCorner<3, 3>() = local[j];
      const int par = kParents[j];
      m.topRightCorner<3, 1>() = par < 0 ? shaped[j] : Vec3(shaped[j] - shaped[par]);
      world[j] = par < 0 ? m : Eigen::Matrix4d(world[par] * m);
    }

    const HandOutput out = forward_kinematics(tpl, params);
    for (int j = 0; j < kNumJoints; ++j) {
      worst = std::max(worst,
                       (out.joints3d[j] - Vec3(world[j].topRightCorner<3, 1>())).norm());
    }
    for (int v = 0; v < tpl.vertex_count(); ++v) {
      Vec3 sv = tpl.mesh_rest[v];
      for (int k = 0; k < kBetaDim; ++k)
        sv += params.beta[k] * tpl.mesh_shape_dirs[v][k];
      Vec3 blended = Vec3::Zero();
      for (int j = 0; j < kNumJoints; ++j) {
        const double w = tpl.skin_weights(v, j);
        if (w == 0.0) continue;
        Eigen::Vector4d h;
        h << sv - shaped[j], 1.0;
        blended += w * (world[j] * h).head<3>();
      }
      worst = std::max(worst, (out.vertices[v] - blended).norm());
    }
  }

  // Outputs must be affine in the shape coefficients.
  double worst_second = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    HandParams p0;
    for (int i = 0; i < kThetaDim; ++i) p0.theta[i] = 0.5 * rng.gauss();
    for (int i = 0; i < kBetaDim; ++i) p0.beta[i] = 0.4 * rng.gauss();
    Eigen::Matrix<double, kBetaDim, 1> dir;
    for (int i = 0; i < kBetaDim; ++i) dir[i] = rng.gauss();
    HandParams p1 = p0, p2 = p0;
    p1.beta += dir;
    p2.beta += 2.0 * dir;
    const HandOutput o0 = forward_kinematics(tpl, p0);
    const HandOutput o1 = forward_kinematics(tpl, p1);
    const HandOutput o2 = forward_kinematics(tpl, p2);
    for (int j = 0; j < kNumJoints; ++j) {
      const Vec3 d2 = o2.joints3d[j] - 2.0 * o1.joints3d[j] + o0.joints3d[j];
      worst_second = std::max(worst_second, d2.norm());
    }
    for (int v = 0; v < tpl.vertex_count(); ++v) {
      const Vec3 d2 = o2.vertices[v] - 2.0 * o1.vertices[v] + o0.vertices[v];
      worst_second = std::max(worst_second, d2.norm());
    }
  }

  const bool pass = worst <= 1e-9 && worst_second <= 1e-7;
  return {pass, fmt("1000 poses, oracle gap %.2e (<= 1e-9); shape second "
                    "difference %.2e (<= 1e-7)",
                    worst, worst_second)};
}

// ---- 10: end-to-end command determinism --------------------------------------

Outcome check_cli_determinism(const std::string &cli, const fs::path &tmp) {
  auto pipeline = [&cli, &tmp](const std::string &tag) -> fs::path {
    const fs::path dir = tmp / ("run_" + tag);
    fs::create_directories(dir);
    const std::string gen =
        cli + " generate --out-dir " + dir.string() +
        " --sequences 2 --frames 40 --seed 5"
        " --rate-jitter2d 0.05 --rate-theta-jump 0.05 --rate-angle-violation 0.05"
        " --rate-shape-drift 0.05 --rate-box-shift 0.05 > " +
        (tmp / ("gen_" + tag + ".log")).string() + " 2>&1";
    if (run_cmd(gen) != 0) throw Error("generate failed for run " + tag);

    const std::string flt =
        cli + " filter " + (dir / "seq000.jsonl").string() + " " +
        (dir / "seq001.jsonl").string() + " --out-dir " + dir.string() +
        " --summary-out " + (dir / "summary.json").string() + " > " +
        (tmp / ("filter_" + tag + ".txt")).string() + " 2>&1";
    if (run_cmd(flt) != 0) throw Error("filter failed for run " + tag);

    const std::string ev =
        cli + " eval --pred " + (dir / "seq000.jsonl").string() + " --gt " +
        (dir / "seq000.truth.jsonl").string() + " --out " +
        (dir / "eval.json").string() + " > /dev/null 2>&1";
    if (run_cmd(ev) != 0) throw Error("eval failed for run " + tag);
    return dir;
  };

  const fs::path a = pipeline("a");
  const fs::path b = pipeline("b");

  std::vector<std::string> names;
  for (const auto &entry : fs::directory_iterator(a))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  int compared = 0;
  for (const std::string &name : names) {
    if (!fs::exists(b / name)) return {false, "second run is missing " + name};
    if (slurp(a / name) != slurp(b / name))
      return {false, name + " differs between identical runs"};
    ++compared;
  }
  if (slurp(tmp / "filter_a.txt") != slurp(tmp / "filter_b.txt"))
    return {false, "filter summary output differs between identical runs"};

  const bool pass = compared >= 9;  // 2x(observed, truth, labels, decisions,
                                    // accepted) is 10, plus summary and eval
  return {pass, fmt("generate/filter/eval twice: %d files byte-identical", compared)};
}

}  // namespace

int main(int argc, char **argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path tmp = fs::temp_directory_path() / "hopose-acceptance";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  struct Check {
    const char *name;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
      {"camera fit precision", check_camera_fit},
      {"pnp pose recovery", check_pnp},
      {"attention gradients (cli)", [&] { return check_gradcheck(cli, tmp); }},
      {"softmax and residual identity", check_softmax_identity},
      {"loss closed forms", check_loss_values},
      {"corpus screening quality", check_filter_corpus},
      {"threshold monotonicity", check_threshold_monotonicity},
      {"metric identities", check_metrics},
      {"kinematics oracle", check_fk_oracle},
      {"command determinism", [&] { return check_cli_determinism(cli, tmp); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i].fn();
    } catch (const std::exception &e) {
      o = {false, std::string("unexpected exception: ") + e.what()};
    }
    std::printf("%2zu/%zu %-32s %s  %s\n", i + 1, checks.size(), checks[i].name,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failed,
              checks.size());
  return failed == 0 ? 0 : 1;
}

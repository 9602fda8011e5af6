// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0
//
// Batch CLI: synthetic sequence generation, pseudo-label filtering, camera
// fitting, PnP, evaluation, gradient checking and loss reporting. Exit
// codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopose/cr_attention.hpp"
#include "hopose/errors.hpp"
#include "hopose/frame_io.hpp"
#include "hopose/geometry.hpp"
#include "hopose/hand_model.hpp"
#include "hopose/metrics.hpp"
#include "hopose/object_pose.hpp"
#include "hopose/pseudo_filter.hpp"
#include "hopose/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hopose;

namespace {

HandTemplate load_template(const std::string &path) {
  if (path.empty()) return HandTemplate::standard();
  return read_hand_template_file(path);
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os << text;
  if (!os) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  std::string out_dir;
  std::string template_path;
  SynthConfig cfg;
};

int run_generate(const GenerateOpts &opt) {
  const HandTemplate tpl = load_template(opt.template_path);
  fs::create_directories(opt.out_dir);
  const auto corpus = generate_corpus(tpl, opt.cfg);
  for (const SyntheticSequence &seq : corpus) {
    const fs::path base = fs::path(opt.out_dir) / seq.observed.sequence_id;
    write_sequence_file(base.string() + ".jsonl", seq.observed);
    write_sequence_file(base.string() + ".truth.jsonl", seq.truth);
    write_labels_file(base.string() + ".labels.jsonl", seq.observed.sequence_id,
                      seq.labels);
  }
  std::printf("wrote %d sequence(s) to %s\n", opt.cfg.sequences, opt.out_dir.c_str());
  return 0;
}

// ------------------------------------------------------------------ filter

struct FilterOpts {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string template_path;
  std::string summary_out;
  FilterConfig cfg;
};

int run_filter(const FilterOpts &opt) {
  opt.cfg.validate();
  const HandTemplate tpl = load_template(opt.template_path);
  fs::create_directories(opt.out_dir);
  FilterSummary overall;
  for (const std::string &input : opt.inputs) {
    const SequenceRecord seq = read_sequence_file(input);
    const std::vector<FilterDecision> decisions = filter_sequence(seq, tpl, opt.cfg);
    const fs::path stem = fs::path(input).stem();
    const fs::path base = fs::path(opt.out_dir) / stem;
    write_decisions_file(base.string() + ".decisions.jsonl", seq.sequence_id,
                         decisions);

    SequenceRecord accepted;
    accepted.sequence_id = seq.sequence_id;
    for (std::size_t i = 0; i < seq.frames.size(); ++i)
      if (decisions[i].accepted) accepted.frames.push_back(seq.frames[i]);
    write_sequence_file(base.string() + ".accepted.jsonl", accepted);

    const FilterSummary s = summarize(decisions);
    overall.total += s.total;
    overall.accepted += s.accepted;
    for (const auto &[c, n] : s.failures) overall.failures[c] += n;
  }
  std::fputs(summary_table(overall).c_str(), stdout);
  if (!opt.summary_out.empty()) write_text(opt.summary_out, summary_to_json(overall));
  return 0;
}

// -------------------------------------------------------------- fit-camera

struct FitCameraOpts {
  std::string input;
  std::string out;
};

int run_fit_camera(const FitCameraOpts &opt) {
  const SequenceRecord seq = read_sequence_file(opt.input);
  std::ostringstream os;
  json header;
  header["format"] = "hopose-cameras";
  header["version"] = kSchemaVersion;
  header["sequence_id"] = seq.sequence_id;
  os << header.dump() << '\n';
  for (const FrameRecord &f : seq.frames) {
    json line;
    line["frame_index"] = f.frame_index;
    try {
      const WeakPerspectiveCamera cam =
          fit_weak_camera(f.prediction.j3d, f.prediction.j2d);
      double residual = 0.0;
      for (std::size_t i = 0; i < f.prediction.j3d.size(); ++i)
        residual += (cam.project(f.prediction.j3d[i]) - f.prediction.j2d[i]).norm();
      residual /= static_cast<double>(f.prediction.j3d.size());
      line["s"] = cam.s;
      line["tx"] = cam.t.x();
      line["ty"] = cam.t.y();
      line["residual"] = residual;
    } catch (const DegenerateConfiguration &) {
      line["degenerate"] = true;
    }
    os << line.dump() << '\n';
  }
  if (opt.out.empty())
    std::fputs(os.str().c_str(), stdout);
  else
    write_text(opt.out, os.str());
  return 0;
}

// --------------------------------------------------------------- solve-pnp

struct SolvePnpOpts {
  std::string points_path;
  std::string object_path;
  std::string out;
};

int run_solve_pnp(const SolvePnpOpts &opt) {
  const PnpProblem problem = read_pnp_problem_file(opt.points_path);
  const ObjectModel model = read_object_model_file(opt.object_path);
  const Pose6Dof pose = recover_pose(problem.points2d, model, problem.camera);
  const double err = reprojection_error(pose, model.control_points, problem.points2d,
                                        problem.camera);
  const std::string text = pose_to_json(pose, err);
  if (opt.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(opt.out, text);
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalOpts {
  std::string pred_path;
  std::string gt_path;
  std::string out;
};

int run_eval(const EvalOpts &opt) {
  const SequenceRecord pred = read_sequence_file(opt.pred_path);
  const SequenceRecord gt = read_sequence_file(opt.gt_path);
  std::map<std::int64_t, const FrameRecord *> gt_by_index;
  for (const FrameRecord &f : gt.frames) gt_by_index[f.frame_index] = &f;

  std::vector<std::vector<Vec3>> pj, gj, pv, gv;
  for (const FrameRecord &f : pred.frames) {
    auto it = gt_by_index.find(f.frame_index);
    if (it == gt_by_index.end()) continue;
    pj.push_back(f.prediction.j3d);
    gj.push_back(it->second->prediction.j3d);
    pv.push_back(f.prediction.vertices);
    gv.push_back(it->second->prediction.vertices);
  }
  if (pj.empty()) throw Error("no common frame indices between pred and gt");
  const EvalReport report = evaluate_sequences(pj, gj, pv, gv);
  const std::string text = eval_report_to_json(report);
  if (opt.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(opt.out, text);
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradCheckOpts {
  std::string checkpoint_path;
  std::string mode = "object";
  int height = 4, width = 4, channels = 8;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::string out;
};

FeatureMap random_map(Rng &rng, int h, int w, int c) {
  FeatureMap m = FeatureMap::zeros(h, w, c);
  for (Eigen::Index p = 0; p < m.data.rows(); ++p)
    for (Eigen::Index ch = 0; ch < m.data.cols(); ++ch) m.data(p, ch) = rng.normal();
  return m;
}

CrBlockParams random_block(Rng &rng, int channels) {
  CrBlockParams b = CrBlockParams::zeros(channels);
  auto fill = [&](Eigen::MatrixXd &m, double scale) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  };
  auto fill_row = [&](Eigen::RowVectorXd &v, double scale, double offset) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = offset + scale * rng.normal();
  };
  fill(b.w_q, 0.3);
  fill(b.w_k, 0.3);
  fill(b.w_v, 0.3);
  fill(b.mlp_w1, 0.3);
  fill(b.mlp_w2, 0.3);
  fill_row(b.mlp_b1, 0.1, 0.0);
  fill_row(b.mlp_b2, 0.1, 0.0);
  fill_row(b.ln_gain, 0.1, 1.0);
  fill_row(b.ln_bias, 0.1, 0.0);
  return b;
}

void collect_block(CrBlockParams &b, std::vector<double *> &out) {
  auto mat = [&](Eigen::MatrixXd &m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  auto row = [&](Eigen::RowVectorXd &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.data() + i);
  };
  mat(b.w_q);
  mat(b.w_k);
  mat(b.w_v);
  mat(b.mlp_w1);
  mat(b.mlp_w2);
  row(b.mlp_b1);
  row(b.mlp_b2);
  row(b.ln_gain);
  row(b.ln_bias);
}

void collect_map(FeatureMap &m, std::vector<double *> &out) {
  for (Eigen::Index i = 0; i < m.data.size(); ++i) out.push_back(m.data.data() + i);
}

double forward_loss(const CrParams &params, const CrInput &input, QueryMode mode) {
  const CrOutput out = cr_forward(params, input, mode);
  double loss = 0.0;
  if (out.object) loss += 0.5 * out.object->data.squaredNorm();
  if (out.hand) loss += 0.5 * out.hand->data.squaredNorm();
  return loss;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::int64_t coordinates = 0;
};

// Central finite differences against the analytic backward pass, walking
// every parameter coordinate of the blocks the mode runs plus every input
// coordinate. The squared-norm loss makes the upstream gradient equal to
// the forward output itself.
GradCheckResult grad_check(CrParams params, CrInput input, QueryMode mode,
                           double step, double suspect) {
  GradTape tape;
  cr_forward(params, input, mode, &tape);
  CrOutput upstream;
  upstream.object = tape.output.object;
  upstream.hand = tape.output.hand;
  CrGradients grads = cr_backward(tape, upstream);

  GradCheckResult result;
  auto check = [&](std::vector<double *> &live, std::vector<double *> &grad,
                   QueryMode eval_mode) {
    for (std::size_t i = 0; i < live.size(); ++i) {
      const double saved = *live[i];
      const double analytic = *grad[i];
      auto numeric_at = [&](double h) {
        *live[i] = saved + h;
        const double lp = forward_loss(params, input, eval_mode);
        *live[i] = saved - h;
        const double lm = forward_loss(params, input, eval_mode);
        *live[i] = saved;
        return (lp - lm) / (2.0 * h);
      };
      auto rel_of = [&](double numeric) {
        return std::abs(analytic - numeric) /
               std::max({1.0, std::abs(analytic), std::abs(numeric)});
      };
      double rel = rel_of(numeric_at(step));
      // A ReLU pre-activation inside the probe window makes the difference
      // quotient straddle the kink and disagree at that single coordinate.
      // Shrinking the window separates that from a wrong gradient: a real
      // bug keeps its error at every step size, a kink artifact loses it.
      if (rel >= suspect) {
        for (const double h : {step / 8.0, step / 64.0})
          rel = std::min(rel, rel_of(numeric_at(h)));
      }
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.coordinates;
    }
  };

  // Parameter coordinates only influence their own block, so the numeric
  // probe can re-run just that block.
  if (mode != QueryMode::kHandQuery && params.object_block) {
    std::vector<double *> live, grad;
    collect_block(*params.object_block, live);
    collect_block(*grads.params.object_block, grad);
    check(live, grad, QueryMode::kObjectQuery);
  }
  if (mode != QueryMode::kObjectQuery && params.hand_block) {
    std::vector<double *> live, grad;
    collect_block(*params.hand_block, live);
    collect_block(*grads.params.hand_block, grad);
    check(live, grad, QueryMode::kHandQuery);
  }
  {
    std::vector<double *> live, grad;
    collect_map(input.hand, live);
    collect_map(input.object, live);
    collect_map(input.inter, live);
    collect_map(grads.input.hand, grad);
    collect_map(grads.input.object, grad);
    collect_map(grads.input.inter, grad);
    check(live, grad, mode);
  }
  return result;
}

int run_gradcheck(const GradCheckOpts &opt) {
  const QueryMode mode = query_mode_from_string(opt.mode);
  CrParams params;
  CrInput input;
  Rng rng(mix_seed(opt.seed, 0));
  int channels = opt.channels;
  if (!opt.checkpoint_path.empty()) {
    Checkpoint ckpt = read_checkpoint_file(opt.checkpoint_path);
    if (ckpt.mode != mode)
      throw Error("checkpoint was written for mode " +
                  std::string(to_string(ckpt.mode)));
    params = std::move(ckpt.params);
    channels = params.object_block ? params.object_block->channels()
                                   : params.hand_block->channels();
  } else {
    if (mode != QueryMode::kHandQuery) params.object_block = random_block(rng, channels);
    if (mode != QueryMode::kObjectQuery) params.hand_block = random_block(rng, channels);
  }
  input.hand = random_map(rng, opt.height, opt.width, channels);
  input.object = random_map(rng, opt.height, opt.width, channels);
  input.inter = random_map(rng, opt.height, opt.width, channels);

  const GradCheckResult result = grad_check(params, input, mode, opt.step,
                                            opt.tolerance);
  json j;
  j["mode"] = to_string(mode);
  j["height"] = opt.height;
  j["width"] = opt.width;
  j["channels"] = channels;
  j["step"] = opt.step;
  j["coordinates"] = result.coordinates;
  j["max_rel_error"] = result.max_rel_error;
  j["pass"] = result.max_rel_error < opt.tolerance;
  const std::string text = j.dump(2) + "\n";
  if (opt.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(opt.out, text);
  if (result.max_rel_error >= opt.tolerance)
    throw NotConverged("gradient check exceeded tolerance", result.max_rel_error);
  return 0;
}

// ------------------------------------------------------------------ losses

struct LossesOpts {
  std::string fixture_path;
  std::string out;
};

int run_losses(const LossesOpts &opt) {
  const LossFixture f = read_loss_fixture_file(opt.fixture_path);
  const double heatmap = heatmap_loss(f.heatmaps_pred, f.heatmaps_gt);
  const double mano = mano_loss(f.mano_pred, f.mano_gt);
  const double hand = hand_loss(heatmap, mano);
  const double p2d = p2d_loss(f.grid, f.gt_points2d);
  const double conf = conf_loss(f.grid, f.gt_points2d);
  const double object = object_loss(p2d, conf);
  const double total = masked_total_loss(hand, object, f.object_visible);
  json j;
  j["heatmap"] = heatmap;
  j["mano"] = mano;
  j["hand"] = hand;
  j["p2d"] = p2d;
  j["conf"] = conf;
  j["object"] = object;
  j["object_visible"] = f.object_visible;
  j["total"] = total;
  const std::string text = j.dump(2) + "\n";
  if (opt.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text(opt.out, text);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"hand-object pose estimation toolkit"};
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App *cmd_gen = app.add_subcommand("generate", "generate synthetic sequences");
  cmd_gen->add_option("--out-dir", gen.out_dir, "output directory")->required();
  cmd_gen->add_option("--template", gen.template_path, "hand template JSON");
  cmd_gen->add_option("--sequences", gen.cfg.sequences)->capture_default_str();
  cmd_gen->add_option("--frames", gen.cfg.frames)->capture_default_str();
  cmd_gen->add_option("--keyframes", gen.cfg.keyframes)->capture_default_str();
  cmd_gen->add_option("--seed", gen.cfg.seed)->capture_default_str();
  cmd_gen->add_option("--max-theta-step", gen.cfg.max_theta_step)->capture_default_str();
  cmd_gen->add_option("--rate-jitter2d", gen.cfg.rates.jitter2d)->capture_default_str();
  cmd_gen->add_option("--rate-theta-jump", gen.cfg.rates.theta_jump)
      ->capture_default_str();
  cmd_gen->add_option("--rate-angle-violation", gen.cfg.rates.angle_violation)
      ->capture_default_str();
  cmd_gen->add_option("--rate-shape-drift", gen.cfg.rates.shape_drift)
      ->capture_default_str();
  cmd_gen->add_option("--rate-box-shift", gen.cfg.rates.box_shift)
      ->capture_default_str();
  cmd_gen->add_option("--jitter2d-sigma", gen.cfg.jitter2d_sigma)
      ->capture_default_str();
  cmd_gen->add_option("--theta-jump-mag", gen.cfg.theta_jump_mag)
      ->capture_default_str();
  cmd_gen->add_option("--shape-drift-mag", gen.cfg.shape_drift_mag)
      ->capture_default_str();
  cmd_gen->add_option("--box-shift-frac", gen.cfg.box_shift_frac)
      ->capture_default_str();

  FilterOpts flt;
  CLI::App *cmd_flt = app.add_subcommand("filter", "screen pseudo-labels");
  cmd_flt->add_option("inputs", flt.inputs, "sequence JSONL files")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_flt->add_option("--out-dir", flt.out_dir, "decisions output directory")
      ->capture_default_str();
  cmd_flt->add_option("--template", flt.template_path, "hand template JSON");
  cmd_flt->add_option("--summary-out", flt.summary_out, "summary JSON path");
  cmd_flt->set_config("--config", "", "key=value threshold overrides");
  cmd_flt->add_option("--iou-min", flt.cfg.iou_min)->capture_default_str();
  cmd_flt->add_option("--reproj-max", flt.cfg.reproj_max)->capture_default_str();
  cmd_flt->add_option("--bone-min", flt.cfg.bone_min)->capture_default_str();
  cmd_flt->add_option("--angle-min-deg", flt.cfg.angle_min_deg)->capture_default_str();
  cmd_flt->add_option("--angle-max-deg", flt.cfg.angle_max_deg)->capture_default_str();
  cmd_flt->add_option("--smooth2d-max", flt.cfg.smooth2d_max)->capture_default_str();
  cmd_flt->add_option("--smooth-theta-max", flt.cfg.smooth_theta_max)
      ->capture_default_str();
  cmd_flt->add_option("--shape-sigma-mult", flt.cfg.shape_sigma_mult)
      ->capture_default_str();

  FitCameraOpts fit;
  CLI::App *cmd_fit = app.add_subcommand("fit-camera", "fit weak-perspective cameras");
  cmd_fit->add_option("input", fit.input, "sequence JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_fit->add_option("--out", fit.out, "output path (default stdout)");

  SolvePnpOpts pnp;
  CLI::App *cmd_pnp = app.add_subcommand("solve-pnp", "recover a 6-DoF object pose");
  cmd_pnp->add_option("--points", pnp.points_path, "2D control points JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_pnp->add_option("--object", pnp.object_path, "object model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_pnp->add_option("--out", pnp.out, "output path (default stdout)");

  EvalOpts ev;
  CLI::App *cmd_eval = app.add_subcommand("eval", "evaluate predictions against truth");
  cmd_eval->add_option("--pred", ev.pred_path, "prediction sequence JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--gt", ev.gt_path, "ground-truth sequence JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--out", ev.out, "output path (default stdout)");

  GradCheckOpts gc;
  CLI::App *cmd_gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
  cmd_gc->add_option("--checkpoint", gc.checkpoint_path, "named-tensor checkpoint JSON")
      ->check(CLI::ExistingFile);
  cmd_gc->add_option("--mode", gc.mode, "object | hand | both")->capture_default_str();
  cmd_gc->add_option("--height", gc.height)->capture_default_str();
  cmd_gc->add_option("--width", gc.width)->capture_default_str();
  cmd_gc->add_option("--channels", gc.channels)->capture_default_str();
  cmd_gc->add_option("--seed", gc.seed)->capture_default_str();
  cmd_gc->add_option("--step", gc.step)->capture_default_str();
  cmd_gc->add_option("--tolerance", gc.tolerance)->capture_default_str();
  cmd_gc->add_option("--out", gc.out, "output path (default stdout)");

  LossesOpts ls;
  CLI::App *cmd_ls = app.add_subcommand("losses", "report every training loss term");
  cmd_ls->add_option("--fixture", ls.fixture_path, "loss fixture JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_ls->add_option("--out", ls.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_gen->parsed()) return run_generate(gen);
    if (cmd_flt->parsed()) return run_filter(flt);
    if (cmd_fit->parsed()) return run_fit_camera(fit);
    if (cmd_pnp->parsed()) return run_solve_pnp(pnp);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_gc->parsed()) return run_gradcheck(gc);
    if (cmd_ls->parsed()) return run_losses(ls);
  } catch (const NotConverged &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DegenerateConfiguration &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

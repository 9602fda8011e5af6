// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/frame_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "hopose/errors.hpp"

namespace hopose {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string &msg, int line = 0) {
  throw ParseError(msg, line);
}

json parse_object(const std::string &text, int line) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail("malformed JSON", line);
  if (!j.is_object()) fail("expected a JSON object", line);
  return j;
}

const json &field(const json &j, const char *key, int line = 0) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing field '") + key + "'", line);
  return *it;
}

double num(const json &j, const char *what, int line = 0) {
  if (!j.is_number()) fail(std::string(what) + " must be a number", line);
  return j.get<double>();
}

std::int64_t integer(const json &j, const char *what, int line = 0) {
  if (!j.is_number_integer()) fail(std::string(what) + " must be an integer", line);
  return j.get<std::int64_t>();
}

bool boolean(const json &j, const char *what, int line = 0) {
  if (!j.is_boolean()) fail(std::string(what) + " must be a boolean", line);
  return j.get<bool>();
}

std::string str(const json &j, const char *what, int line = 0) {
  if (!j.is_string()) fail(std::string(what) + " must be a string", line);
  return j.get<std::string>();
}

void check_header(const json &h, const char *format, int line) {
  if (str(field(h, "format", line), "format", line) != format)
    fail(std::string("expected format '") + format + "'", line);
  if (integer(field(h, "version", line), "version", line) != kSchemaVersion)
    fail("unsupported schema version", line);
}

json vec2_json(const Vec2 &v) { return json::array({v.x(), v.y()}); }
json vec3_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

json points2_json(const std::vector<Vec2> &pts) {
  json a = json::array();
  for (const Vec2 &p : pts) a.push_back(vec2_json(p));
  return a;
}

json points3_json(const std::vector<Vec3> &pts) {
  json a = json::array();
  for (const Vec3 &p : pts) a.push_back(vec3_json(p));
  return a;
}

Vec2 to_vec2(const json &j, const char *what, int line = 0) {
  if (!j.is_array() || j.size() != 2) fail(std::string(what) + " must be [x, y]", line);
  return {num(j[0], what, line), num(j[1], what, line)};
}

Vec3 to_vec3(const json &j, const char *what, int line = 0) {
  if (!j.is_array() || j.size() != 3)
    fail(std::string(what) + " must be [x, y, z]", line);
  return {num(j[0], what, line), num(j[1], what, line), num(j[2], what, line)};
}

std::vector<Vec2> to_points2(const json &j, int expected, const char *what,
                             int line = 0) {
  if (!j.is_array()) fail(std::string(what) + " must be an array", line);
  if (expected >= 0 && static_cast<int>(j.size()) != expected)
    fail(std::string(what) + " must have " + std::to_string(expected) + " entries",
         line);
  std::vector<Vec2> out;
  out.reserve(j.size());
  for (const json &e : j) out.push_back(to_vec2(e, what, line));
  return out;
}

std::vector<Vec3> to_points3(const json &j, int expected, const char *what,
                             int line = 0) {
  if (!j.is_array()) fail(std::string(what) + " must be an array", line);
  if (expected >= 0 && static_cast<int>(j.size()) != expected)
    fail(std::string(what) + " must have " + std::to_string(expected) + " entries",
         line);
  std::vector<Vec3> out;
  out.reserve(j.size());
  for (const json &e : j) out.push_back(to_vec3(e, what, line));
  return out;
}

template <typename EigenVec>
json eigen_json(const EigenVec &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename EigenVec>
void to_eigen_fixed(const json &j, EigenVec &out, const char *what, int line = 0) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != out.size())
    fail(std::string(what) + " must have " + std::to_string(out.size()) + " numbers",
         line);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = num(j[i], what, line);
}

Eigen::VectorXd to_eigen_dynamic(const json &j, const char *what, int line = 0) {
  if (!j.is_array()) fail(std::string(what) + " must be an array", line);
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = num(j[i], what, line);
  return out;
}

// Shared line cursor: counts every physical line, hands back non-blank ones.
class LineReader {
 public:
  explicit LineReader(std::istream &is) : is_(is) {}

  bool next(std::string *out) {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      *out = std::move(line);
      return true;
    }
    return false;
  }

  int lineno() const { return lineno_; }

 private:
  std::istream &is_;
  int lineno_ = 0;
};

std::string slurp(std::istream &is) {
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

template <typename Fn>
auto with_file_context(const std::string &path, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  return is;
}

json tensor_json(const Eigen::MatrixXd &m) {
  json t;
  t["shape"] = json::array({m.rows(), m.cols()});
  json v = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  t["values"] = std::move(v);
  return t;
}

json tensor_json(const Eigen::RowVectorXd &v) {
  json t;
  t["shape"] = json::array({v.size()});
  json vals = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) vals.push_back(v(i));
  t["values"] = std::move(vals);
  return t;
}

Eigen::MatrixXd to_matrix(const json &t, const std::string &name) {
  const json &shape = field(t, "shape");
  if (!shape.is_array() || shape.size() != 2)
    fail("tensor '" + name + "' must have a 2-entry shape");
  const auto rows = integer(shape[0], "shape", 0);
  const auto cols = integer(shape[1], "shape", 0);
  if (rows < 0 || cols < 0) fail("tensor '" + name + "' has a negative shape");
  const json &vals = field(t, "values");
  if (!vals.is_array() || static_cast<std::int64_t>(vals.size()) != rows * cols)
    fail("tensor '" + name + "' values do not match its shape");
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = num(vals[i++], name.c_str());
  return m;
}

Eigen::RowVectorXd to_row_vector(const json &t, const std::string &name) {
  const json &shape = field(t, "shape");
  if (!shape.is_array() || shape.size() != 1)
    fail("tensor '" + name + "' must have a 1-entry shape");
  const auto n = integer(shape[0], "shape", 0);
  if (n < 0) fail("tensor '" + name + "' has a negative shape");
  const json &vals = field(t, "values");
  if (!vals.is_array() || static_cast<std::int64_t>(vals.size()) != n)
    fail("tensor '" + name + "' values do not match its shape");
  Eigen::RowVectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = num(vals[i], name.c_str());
  return v;
}

void put_block(json &tensors, const std::string &prefix, const CrBlockParams &b) {
  tensors[prefix + ".w_q"] = tensor_json(b.w_q);
  tensors[prefix + ".w_k"] = tensor_json(b.w_k);
  tensors[prefix + ".w_v"] = tensor_json(b.w_v);
  tensors[prefix + ".mlp_w1"] = tensor_json(b.mlp_w1);
  tensors[prefix + ".mlp_w2"] = tensor_json(b.mlp_w2);
  tensors[prefix + ".mlp_b1"] = tensor_json(b.mlp_b1);
  tensors[prefix + ".mlp_b2"] = tensor_json(b.mlp_b2);
  tensors[prefix + ".ln_gain"] = tensor_json(b.ln_gain);
  tensors[prefix + ".ln_bias"] = tensor_json(b.ln_bias);
}

CrBlockParams get_block(const json &tensors, const std::string &prefix) {
  auto tensor = [&](const char *suffix) -> const json & {
    const std::string name = prefix + "." + suffix;
    auto it = tensors.find(name);
    if (it == tensors.end()) fail("checkpoint is missing tensor '" + name + "'");
    return *it;
  };
  CrBlockParams b;
  b.w_q = to_matrix(tensor("w_q"), prefix + ".w_q");
  b.w_k = to_matrix(tensor("w_k"), prefix + ".w_k");
  b.w_v = to_matrix(tensor("w_v"), prefix + ".w_v");
  b.mlp_w1 = to_matrix(tensor("mlp_w1"), prefix + ".mlp_w1");
  b.mlp_w2 = to_matrix(tensor("mlp_w2"), prefix + ".mlp_w2");
  b.mlp_b1 = to_row_vector(tensor("mlp_b1"), prefix + ".mlp_b1");
  b.mlp_b2 = to_row_vector(tensor("mlp_b2"), prefix + ".mlp_b2");
  b.ln_gain = to_row_vector(tensor("ln_gain"), prefix + ".ln_gain");
  b.ln_bias = to_row_vector(tensor("ln_bias"), prefix + ".ln_bias");
  return b;
}

json fmap_json(const FeatureMap &m) {
  json t;
  t["height"] = m.height;
  t["width"] = m.width;
  t["channels"] = m.channels;
  json v = json::array();
  for (Eigen::Index p = 0; p < m.data.rows(); ++p)
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) v.push_back(m.data(p, c));
  t["values"] = std::move(v);
  return t;
}

FeatureMap to_fmap(const json &j, const char *what) {
  const int h = static_cast<int>(integer(field(j, "height"), what));
  const int w = static_cast<int>(integer(field(j, "width"), what));
  const int c = static_cast<int>(integer(field(j, "channels"), what));
  if (h <= 0 || w <= 0 || c <= 0) fail(std::string(what) + " has non-positive dims");
  const json &vals = field(j, "values");
  if (!vals.is_array() ||
      static_cast<std::int64_t>(vals.size()) !=
          static_cast<std::int64_t>(h) * w * c)
    fail(std::string(what) + " values do not match height*width*channels");
  FeatureMap m = FeatureMap::zeros(h, w, c);
  Eigen::Index i = 0;
  for (Eigen::Index p = 0; p < m.data.rows(); ++p)
    for (Eigen::Index ch = 0; ch < m.data.cols(); ++ch) m.data(p, ch) = num(vals[i++], what);
  return m;
}

json mano_json(const ManoTerms &t) {
  json j;
  j["theta"] = eigen_json(t.theta);
  j["beta"] = eigen_json(t.beta);
  j["joints3d"] = points3_json(t.joints3d);
  j["vertices"] = points3_json(t.vertices);
  return j;
}

ManoTerms to_mano(const json &j, const char *what) {
  ManoTerms t;
  t.theta = to_eigen_dynamic(field(j, "theta"), what);
  t.beta = to_eigen_dynamic(field(j, "beta"), what);
  t.joints3d = to_points3(field(j, "joints3d"), -1, what);
  t.vertices = to_points3(field(j, "vertices"), -1, what);
  return t;
}

}  // namespace

void write_sequence_jsonl(std::ostream &os, const SequenceRecord &seq) {
  const int vcount =
      seq.frames.empty() ? 0
                         : static_cast<int>(seq.frames.front().prediction.vertices.size());
  json header;
  header["format"] = "hopose-frames";
  header["version"] = kSchemaVersion;
  header["sequence_id"] = seq.sequence_id;
  header["vertex_count"] = vcount;
  os << header.dump() << '\n';
  for (const FrameRecord &f : seq.frames) {
    json line;
    line["frame_index"] = f.frame_index;
    line["j2d"] = points2_json(f.prediction.j2d);
    line["j3d"] = points3_json(f.prediction.j3d);
    line["vertices"] = points3_json(f.prediction.vertices);
    line["theta"] = eigen_json(f.prediction.params.theta);
    line["beta"] = eigen_json(f.prediction.params.beta);
    line["gt_box"] = json::array({f.gt_hand_box.min.x(), f.gt_hand_box.min.y(),
                                  f.gt_hand_box.max.x(), f.gt_hand_box.max.y()});
    os << line.dump() << '\n';
  }
}

SequenceRecord read_sequence_jsonl(std::istream &is) {
  LineReader lines(is);
  std::string text;
  if (!lines.next(&text)) fail("empty stream, expected a header line");
  json header = parse_object(text, lines.lineno());
  check_header(header, "hopose-frames", lines.lineno());
  SequenceRecord seq;
  seq.sequence_id = str(field(header, "sequence_id", lines.lineno()), "sequence_id",
                        lines.lineno());
  const int vcount = static_cast<int>(
      integer(field(header, "vertex_count", lines.lineno()), "vertex_count",
              lines.lineno()));
  if (vcount < 0) fail("vertex_count must be non-negative", lines.lineno());

  while (lines.next(&text)) {
    const int ln = lines.lineno();
    json j = parse_object(text, ln);
    FrameRecord f;
    f.frame_index = integer(field(j, "frame_index", ln), "frame_index", ln);
    f.prediction.j2d = to_points2(field(j, "j2d", ln), kNumJoints, "j2d", ln);
    f.prediction.j3d = to_points3(field(j, "j3d", ln), kNumJoints, "j3d", ln);
    f.prediction.vertices =
        to_points3(field(j, "vertices", ln), vcount, "vertices", ln);
    to_eigen_fixed(field(j, "theta", ln), f.prediction.params.theta, "theta", ln);
    to_eigen_fixed(field(j, "beta", ln), f.prediction.params.beta, "beta", ln);
    const json &b = field(j, "gt_box", ln);
    if (!b.is_array() || b.size() != 4) fail("gt_box must be [x0, y0, x1, y1]", ln);
    try {
      f.gt_hand_box = Box2(Vec2(num(b[0], "gt_box", ln), num(b[1], "gt_box", ln)),
                           Vec2(num(b[2], "gt_box", ln), num(b[3], "gt_box", ln)));
    } catch (const Error &e) {
      fail(e.what(), ln);
    }
    seq.frames.push_back(std::move(f));
  }
  try {
    seq.validate();
  } catch (const Error &e) {
    fail(e.what());
  }
  return seq;
}

void write_sequence_file(const std::string &path, const SequenceRecord &seq) {
  auto os = open_out(path);
  write_sequence_jsonl(os, seq);
  if (!os) throw Error("write failed: " + path);
}

SequenceRecord read_sequence_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_sequence_jsonl(is); });
}

void write_labels_jsonl(std::ostream &os, const std::string &sequence_id,
                        const std::vector<FrameLabel> &labels) {
  json header;
  header["format"] = "hopose-labels";
  header["version"] = kSchemaVersion;
  header["sequence_id"] = sequence_id;
  os << header.dump() << '\n';
  for (const FrameLabel &l : labels) {
    json line;
    line["frame_index"] = l.frame_index;
    line["corrupted"] = l.corrupted;
    json modes = json::array();
    for (NoiseMode m : l.modes) modes.push_back(to_string(m));
    line["modes"] = std::move(modes);
    os << line.dump() << '\n';
  }
}

std::vector<FrameLabel> read_labels_jsonl(std::istream &is, std::string *sequence_id) {
  LineReader lines(is);
  std::string text;
  if (!lines.next(&text)) fail("empty stream, expected a header line");
  json header = parse_object(text, lines.lineno());
  check_header(header, "hopose-labels", lines.lineno());
  if (sequence_id)
    *sequence_id = str(field(header, "sequence_id", lines.lineno()), "sequence_id",
                       lines.lineno());
  std::vector<FrameLabel> out;
  while (lines.next(&text)) {
    const int ln = lines.lineno();
    json j = parse_object(text, ln);
    FrameLabel l;
    l.frame_index = integer(field(j, "frame_index", ln), "frame_index", ln);
    l.corrupted = boolean(field(j, "corrupted", ln), "corrupted", ln);
    const json &modes = field(j, "modes", ln);
    if (!modes.is_array()) fail("modes must be an array", ln);
    for (const json &m : modes) {
      try {
        l.modes.push_back(noise_mode_from_string(str(m, "mode", ln)));
      } catch (const Error &e) {
        fail(e.what(), ln);
      }
    }
    out.push_back(std::move(l));
  }
  return out;
}

void write_labels_file(const std::string &path, const std::string &sequence_id,
                       const std::vector<FrameLabel> &labels) {
  auto os = open_out(path);
  write_labels_jsonl(os, sequence_id, labels);
  if (!os) throw Error("write failed: " + path);
}

std::vector<FrameLabel> read_labels_file(const std::string &path,
                                         std::string *sequence_id) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_labels_jsonl(is, sequence_id); });
}

void write_decisions_jsonl(std::ostream &os, const std::string &sequence_id,
                           const std::vector<FilterDecision> &decisions) {
  json header;
  header["format"] = "hopose-decisions";
  header["version"] = kSchemaVersion;
  header["sequence_id"] = sequence_id;
  os << header.dump() << '\n';
  for (const FilterDecision &d : decisions) {
    json line;
    line["frame_index"] = d.frame_index;
    line["accepted"] = d.accepted;
    json failed = json::array();
    for (Constraint c : d.failed) failed.push_back(to_string(c));
    line["failed"] = std::move(failed);
    os << line.dump() << '\n';
  }
}

void write_decisions_file(const std::string &path, const std::string &sequence_id,
                          const std::vector<FilterDecision> &decisions) {
  auto os = open_out(path);
  write_decisions_jsonl(os, sequence_id, decisions);
  if (!os) throw Error("write failed: " + path);
}

std::string summary_to_json(const FilterSummary &summary) {
  json j;
  j["total"] = summary.total;
  j["accepted"] = summary.accepted;
  j["rejected"] = summary.total - summary.accepted;
  json failures;
  for (int c = 0; c <= static_cast<int>(Constraint::kShapeDeviation); ++c) {
    const Constraint key = static_cast<Constraint>(c);
    auto it = summary.failures.find(key);
    failures[to_string(key)] = it == summary.failures.end() ? 0 : it->second;
  }
  j["failures"] = std::move(failures);
  return j.dump(2) + "\n";
}

std::string summary_table(const FilterSummary &summary) {
  char buf[96];
  std::string out;
  const long long total = summary.total;
  const long long accepted = summary.accepted;
  const double pct = total > 0 ? 100.0 * static_cast<double>(accepted) / total : 0.0;
  std::snprintf(buf, sizeof buf, "%-16s %8lld\n", "frames", total);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-16s %8lld  (%.2f%%)\n", "accepted", accepted, pct);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-16s %8lld\n", "rejected", total - accepted);
  out += buf;
  out += "rejections by constraint\n";
  for (int c = 0; c <= static_cast<int>(Constraint::kShapeDeviation); ++c) {
    const Constraint key = static_cast<Constraint>(c);
    auto it = summary.failures.find(key);
    const long long n = it == summary.failures.end() ? 0 : it->second;
    std::snprintf(buf, sizeof buf, "  %-16s %6lld\n", to_string(key), n);
    out += buf;
  }
  return out;
}

void write_hand_template_json(std::ostream &os, const HandTemplate &tpl) {
  json j;
  j["format"] = "hopose-hand-template";
  j["version"] = kSchemaVersion;
  j["joints"] = points3_json(tpl.rest_joints);
  json parents = json::array();
  for (int p : tpl.parents) parents.push_back(p);
  j["parents"] = std::move(parents);
  json sdirs = json::array();
  for (const auto &per_joint : tpl.shape_dirs) {
    json dirs = json::array();
    for (const Vec3 &d : per_joint) dirs.push_back(vec3_json(d));
    sdirs.push_back(std::move(dirs));
  }
  j["shape_dirs"] = std::move(sdirs);
  j["mesh"] = points3_json(tpl.mesh_rest);
  json weights = json::array();
  for (Eigen::Index r = 0; r < tpl.skin_weights.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < tpl.skin_weights.cols(); ++c)
      row.push_back(tpl.skin_weights(r, c));
    weights.push_back(std::move(row));
  }
  j["skin_weights"] = std::move(weights);
  json mdirs = json::array();
  for (const auto &per_vertex : tpl.mesh_shape_dirs) {
    json dirs = json::array();
    for (const Vec3 &d : per_vertex) dirs.push_back(vec3_json(d));
    mdirs.push_back(std::move(dirs));
  }
  j["mesh_shape_dirs"] = std::move(mdirs);
  os << j.dump(2) << '\n';
}

HandTemplate read_hand_template_json(std::istream &is) {
  json j = parse_object(slurp(is), 0);
  check_header(j, "hopose-hand-template", 0);
  HandTemplate tpl;
  tpl.rest_joints = to_points3(field(j, "joints"), kNumJoints, "joints");
  const json &parents = field(j, "parents");
  if (!parents.is_array() || parents.size() != kNumJoints)
    fail("parents must list one entry per joint");
  for (int i = 0; i < kNumJoints; ++i)
    tpl.parents[static_cast<std::size_t>(i)] =
        static_cast<int>(integer(parents[i], "parents"));
  const json &sdirs = field(j, "shape_dirs");
  if (!sdirs.is_array() || sdirs.size() != kNumJoints)
    fail("shape_dirs must list one entry per joint");
  tpl.shape_dirs.resize(kNumJoints);
  for (int i = 0; i < kNumJoints; ++i) {
    const json &dirs = sdirs[i];
    if (!dirs.is_array() || dirs.size() != kBetaDim)
      fail("shape_dirs entries must hold one direction per shape coefficient");
    for (int k = 0; k < kBetaDim; ++k)
      tpl.shape_dirs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          to_vec3(dirs[k], "shape_dirs");
  }
  tpl.mesh_rest = to_points3(field(j, "mesh"), -1, "mesh");
  const int vcount = static_cast<int>(tpl.mesh_rest.size());
  const json &weights = field(j, "skin_weights");
  if (!weights.is_array() || static_cast<int>(weights.size()) != vcount)
    fail("skin_weights must have one row per mesh vertex");
  tpl.skin_weights.resize(vcount, kNumJoints);
  for (int r = 0; r < vcount; ++r) {
    const json &row = weights[r];
    if (!row.is_array() || row.size() != kNumJoints)
      fail("skin_weights rows must have one entry per joint");
    for (int c = 0; c < kNumJoints; ++c)
      tpl.skin_weights(r, c) = num(row[c], "skin_weights");
  }
  const json &mdirs = field(j, "mesh_shape_dirs");
  if (!mdirs.is_array() || static_cast<int>(mdirs.size()) != vcount)
    fail("mesh_shape_dirs must have one entry per mesh vertex");
  tpl.mesh_shape_dirs.resize(static_cast<std::size_t>(vcount));
  for (int i = 0; i < vcount; ++i) {
    const json &dirs = mdirs[i];
    if (!dirs.is_array() || dirs.size() != kBetaDim)
      fail("mesh_shape_dirs entries must hold one direction per shape coefficient");
    for (int k = 0; k < kBetaDim; ++k)
      tpl.mesh_shape_dirs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          to_vec3(dirs[k], "mesh_shape_dirs");
  }
  try {
    tpl.validate();
  } catch (const Error &e) {
    fail(e.what());
  }
  return tpl;
}

void write_hand_template_file(const std::string &path, const HandTemplate &tpl) {
  auto os = open_out(path);
  write_hand_template_json(os, tpl);
  if (!os) throw Error("write failed: " + path);
}

HandTemplate read_hand_template_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_hand_template_json(is); });
}

ObjectModel read_object_model_json(std::istream &is) {
  json j = parse_object(slurp(is), 0);
  check_header(j, "hopose-object", 0);
  std::vector<Vec3> mesh;
  if (j.contains("mesh")) mesh = to_points3(j["mesh"], -1, "mesh");
  ObjectModel model;
  try {
    if (j.contains("corners")) {
      model = ObjectModel::from_corners(to_points3(j["corners"], 8, "corners"),
                                        std::move(mesh));
    } else if (j.contains("extents")) {
      const json &e = j["extents"];
      if (!e.is_array() || e.size() != 3) fail("extents must be [ex, ey, ez]");
      model = ObjectModel::from_extents(num(e[0], "extents"), num(e[1], "extents"),
                                        num(e[2], "extents"), std::move(mesh));
    } else {
      fail("object model needs either 'corners' or 'extents'");
    }
  } catch (const ParseError &) {
    throw;
  } catch (const Error &e) {
    fail(e.what());
  }
  return model;
}

void write_object_model_json(std::ostream &os, const ObjectModel &model) {
  json j;
  j["format"] = "hopose-object";
  j["version"] = kSchemaVersion;
  json corners = json::array();
  for (int i = 0; i < 8; ++i) corners.push_back(vec3_json(model.control_points[i]));
  j["corners"] = std::move(corners);
  j["mesh"] = points3_json(model.mesh_vertices);
  os << j.dump(2) << '\n';
}

ObjectModel read_object_model_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_object_model_json(is); });
}

void write_object_model_file(const std::string &path, const ObjectModel &model) {
  auto os = open_out(path);
  write_object_model_json(os, model);
  if (!os) throw Error("write failed: " + path);
}

void write_checkpoint_json(std::ostream &os, const Checkpoint &ckpt) {
  ckpt.params.validate_for(ckpt.mode);
  json j;
  j["format"] = "hopose-checkpoint";
  j["version"] = kSchemaVersion;
  j["mode"] = to_string(ckpt.mode);
  json tensors;
  if (ckpt.params.object_block) put_block(tensors, "object", *ckpt.params.object_block);
  if (ckpt.params.hand_block) put_block(tensors, "hand", *ckpt.params.hand_block);
  j["tensors"] = std::move(tensors);
  os << j.dump(2) << '\n';
}

Checkpoint read_checkpoint_json(std::istream &is) {
  json j = parse_object(slurp(is), 0);
  check_header(j, "hopose-checkpoint", 0);
  Checkpoint ckpt;
  try {
    ckpt.mode = query_mode_from_string(str(field(j, "mode"), "mode"));
  } catch (const Error &e) {
    fail(e.what());
  }
  const json &tensors = field(j, "tensors");
  if (!tensors.is_object()) fail("tensors must be an object");
  if (tensors.contains("object.w_q"))
    ckpt.params.object_block = get_block(tensors, "object");
  if (tensors.contains("hand.w_q")) ckpt.params.hand_block = get_block(tensors, "hand");
  try {
    ckpt.params.validate_for(ckpt.mode);
  } catch (const Error &e) {
    fail(e.what());
  }
  return ckpt;
}

void write_checkpoint_file(const std::string &path, const Checkpoint &ckpt) {
  auto os = open_out(path);
  write_checkpoint_json(os, ckpt);
  if (!os) throw Error("write failed: " + path);
}

Checkpoint read_checkpoint_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_checkpoint_json(is); });
}

PnpProblem read_pnp_problem_json(std::istream &is) {
  json j = parse_object(slurp(is), 0);
  check_header(j, "hopose-pnp", 0);
  const json &cam = field(j, "camera");
  if (!cam.is_object()) fail("camera must be an object");
  PnpProblem problem;
  try {
    problem.camera =
        PerspectiveCamera(num(field(cam, "fx"), "fx"), num(field(cam, "fy"), "fy"),
                          num(field(cam, "cx"), "cx"), num(field(cam, "cy"), "cy"));
  } catch (const Error &e) {
    fail(e.what());
  }
  problem.points2d = to_points2(field(j, "points2d"), -1, "points2d");
  return problem;
}

void write_pnp_problem_json(std::ostream &os, const PnpProblem &problem) {
  json j;
  j["format"] = "hopose-pnp";
  j["version"] = kSchemaVersion;
  json cam;
  cam["fx"] = problem.camera.fx;
  cam["fy"] = problem.camera.fy;
  cam["cx"] = problem.camera.cx;
  cam["cy"] = problem.camera.cy;
  j["camera"] = std::move(cam);
  j["points2d"] = points2_json(problem.points2d);
  os << j.dump(2) << '\n';
}

PnpProblem read_pnp_problem_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_pnp_problem_json(is); });
}

void write_pnp_problem_file(const std::string &path, const PnpProblem &problem) {
  auto os = open_out(path);
  write_pnp_problem_json(os, problem);
  if (!os) throw Error("write failed: " + path);
}

std::string pose_to_json(const Pose6Dof &pose, double reproj_error) {
  json j;
  json rot = json::array();
  const Mat3 &m = pose.rotation.matrix();
  for (int r = 0; r < 3; ++r)
    rot.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  j["rotation"] = std::move(rot);
  j["translation"] = vec3_json(pose.translation);
  j["reprojection_error"] = reproj_error;
  return j.dump(2) + "\n";
}

LossFixture read_loss_fixture_json(std::istream &is) {
  json j = parse_object(slurp(is), 0);
  check_header(j, "hopose-loss-fixture", 0);
  LossFixture f;
  const json &hm = field(j, "heatmaps");
  f.heatmaps_pred = to_fmap(field(hm, "pred"), "heatmaps.pred");
  f.heatmaps_gt = to_fmap(field(hm, "gt"), "heatmaps.gt");
  const json &mano = field(j, "mano");
  f.mano_pred = to_mano(field(mano, "pred"), "mano.pred");
  f.mano_gt = to_mano(field(mano, "gt"), "mano.gt");
  const json &grid = field(j, "grid");
  f.grid.grid = static_cast<int>(integer(field(grid, "grid"), "grid"));
  f.grid.num_points = static_cast<int>(integer(field(grid, "num_points"), "num_points"));
  f.grid.offsets = to_points2(field(grid, "offsets"), -1, "offsets");
  const json &confs = field(grid, "confidences");
  if (!confs.is_array()) fail("confidences must be an array");
  f.grid.confidences.reserve(confs.size());
  for (const json &c : confs) f.grid.confidences.push_back(num(c, "confidences"));
  try {
    f.grid.validate();
  } catch (const Error &e) {
    fail(e.what());
  }
  f.gt_points2d = to_points2(field(j, "gt_points2d"), f.grid.num_points, "gt_points2d");
  f.object_visible = boolean(field(j, "object_visible"), "object_visible");
  return f;
}

void write_loss_fixture_json(std::ostream &os, const LossFixture &fixture) {
  json j;
  j["format"] = "hopose-loss-fixture";
  j["version"] = kSchemaVersion;
  json hm;
  hm["pred"] = fmap_json(fixture.heatmaps_pred);
  hm["gt"] = fmap_json(fixture.heatmaps_gt);
  j["heatmaps"] = std::move(hm);
  json mano;
  mano["pred"] = mano_json(fixture.mano_pred);
  mano["gt"] = mano_json(fixture.mano_gt);
  j["mano"] = std::move(mano);
  json grid;
  grid["grid"] = fixture.grid.grid;
  grid["num_points"] = fixture.grid.num_points;
  grid["offsets"] = points2_json(fixture.grid.offsets);
  json confs = json::array();
  for (double c : fixture.grid.confidences) confs.push_back(c);
  grid["confidences"] = std::move(confs);
  j["grid"] = std::move(grid);
  j["gt_points2d"] = points2_json(fixture.gt_points2d);
  j["object_visible"] = fixture.object_visible;
  os << j.dump(2) << '\n';
}

LossFixture read_loss_fixture_file(const std::string &path) {
  auto is = open_in(path);
  return with_file_context(path, [&] { return read_loss_fixture_json(is); });
}

void write_loss_fixture_file(const std::string &path, const LossFixture &fixture) {
  auto os = open_out(path);
  write_loss_fixture_json(os, fixture);
  if (!os) throw Error("write failed: " + path);
}

std::string eval_report_to_json(const EvalReport &report) {
  json j;
  j["frames"] = report.frames;
  j["mean_joint_error"] = report.mean_joint_error;
  j["mean_vertex_error"] = report.mean_vertex_error;
  j["f_at_5mm"] = report.f_at_5mm;
  j["f_at_15mm"] = report.f_at_15mm;
  j["pck_auc_joints"] = report.pck_auc_joints;
  j["pcv_auc_vertices"] = report.pcv_auc_vertices;
  return j.dump(2) + "\n";
}

}  // namespace hopose

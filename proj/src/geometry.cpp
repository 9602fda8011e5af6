// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#include "hopose/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace hopose {

namespace {

constexpr double kOrthoTol = 1e-9;

Eigen::Matrix3d skew(const Vec3 &v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

void check_finite(const std::vector<Vec3> &pts, const char *what) {
  for (const auto &p : pts) {
    if (!all_finite(p)) throw DimensionMismatch(std::string(what) + ": non-finite coordinate");
  }
}

void check_finite(const std::vector<Vec2> &pts, const char *what) {
  for (const auto &p : pts) {
    if (!all_finite(p)) throw DimensionMismatch(std::string(what) + ": non-finite coordinate");
  }
}

}  // namespace

bool all_finite(const Vec2 &v) {
  return std::isfinite(v.x()) && std::isfinite(v.y());
}

bool all_finite(const Vec3 &v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

Rotation3 Rotation3::from_matrix(const Mat3 &m) {
  const double ortho = (m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!m.allFinite() || ortho > kOrthoTol || std::abs(m.determinant() - 1.0) > kOrthoTol) {
    throw DegenerateConfiguration("from_matrix: not a proper rotation");
  }
  return Rotation3(m);
}

Rotation3 Rotation3::from_axis_angle(const Vec3 &aa) {
  if (!all_finite(aa)) throw DegenerateConfiguration("from_axis_angle: non-finite input");
  const double angle = aa.norm();
  if (angle < 1e-14) return Rotation3();
  return Rotation3(Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix());
}

Rotation3 Rotation3::project_nearest(const Mat3 &m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return Rotation3(r);
}

Vec3 Rotation3::to_axis_angle() const {
  Eigen::AngleAxisd aa(m_);
  return aa.angle() * aa.axis();
}

Rotation3 Rotation3::inverse() const { return Rotation3(m_.transpose()); }

Rotation3 Rotation3::operator*(const Rotation3 &rhs) const {
  return Rotation3(Mat3(m_ * rhs.m_));
}

double Rotation3::angle_to(const Rotation3 &other) const {
  const double c = ((m_.transpose() * other.m_).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

WeakPerspectiveCamera::WeakPerspectiveCamera(double scale, const Vec2 &trans)
    : s(scale), t(trans) {
  if (!(s > 0.0) || !std::isfinite(s) || !all_finite(t)) {
    throw DegenerateConfiguration("weak camera: scale must be positive and finite");
  }
}

PerspectiveCamera::PerspectiveCamera(double fx_, double fy_, double cx_, double cy_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw DegenerateConfiguration("perspective camera: bad intrinsics");
  }
}

Box2::Box2(const Vec2 &mn, const Vec2 &mx) : min(mn), max(mx) {
  if (!all_finite(mn) || !all_finite(mx) || mn.x() > mx.x() || mn.y() > mx.y()) {
    throw DegenerateConfiguration("box: min must not exceed max");
  }
}

std::vector<Vec2> project_weak(const WeakPerspectiveCamera &cam,
                               const std::vector<Vec3> &points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto &p : points) out.push_back(cam.project(p));
  return out;
}

WeakPerspectiveCamera fit_weak_camera(const std::vector<Vec3> &j3d,
                                      const std::vector<Vec2> &j2d) {
  if (j3d.size() != j2d.size() || j3d.empty()) {
    throw DimensionMismatch("fit_weak_camera: point count mismatch");
  }
  check_finite(j3d, "fit_weak_camera");
  check_finite(j2d, "fit_weak_camera");
  const double n = static_cast<double>(j3d.size());

  Vec2 mean3 = Vec2::Zero(), mean2 = Vec2::Zero();
  for (size_t i = 0; i < j3d.size(); ++i) {
    mean3 += j3d[i].head<2>();
    mean2 += j2d[i];
  }
  mean3 /= n;
  mean2 /= n;

  double var = 0.0, cov = 0.0;
  for (size_t i = 0; i < j3d.size(); ++i) {
    const Vec2 x = j3d[i].head<2>() - mean3;
    const Vec2 y = j2d[i] - mean2;
    var += x.squaredNorm();
    cov += x.dot(y);
  }
  var /= n;
  cov /= n;
  if (var < 1e-12) {
    throw DegenerateConfiguration("fit_weak_camera: xy spread of 3d joints is degenerate");
  }
  const double s = std::max(cov / var, 1e-8);
  return WeakPerspectiveCamera(s, mean2 - s * mean3);
}

double reprojection_error(const Pose6Dof &pose, const std::vector<Vec3> &pts3d,
                          const std::vector<Vec2> &pts2d,
                          const PerspectiveCamera &cam) {
  double e = 0.0;
  for (size_t i = 0; i < pts3d.size(); ++i) {
    e += (cam.project(pose.apply(pts3d[i])) - pts2d[i]).squaredNorm();
  }
  return e / static_cast<double>(pts3d.size());
}

namespace {

// Direct linear transform for [R|t] with known intrinsics. Points are
// passed through normalizing similarities on both sides to keep the
// 2n x 12 system well conditioned.
void dlt_init(const std::vector<Vec3> &pts3d, const std::vector<Vec2> &pts2d,
              const PerspectiveCamera &cam, Mat3 *r_out, Vec3 *t_out) {
  const int n = static_cast<int>(pts3d.size());

  // Coplanarity / collinearity test on the 3D cloud.
  Vec3 c3 = Vec3::Zero();
  for (const auto &p : pts3d) c3 += p;
  c3 /= n;
  Eigen::MatrixXd centered(n, 3);
  for (int i = 0; i < n; ++i) centered.row(i) = (pts3d[i] - c3).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> shape_svd(centered);
  const auto &sv = shape_svd.singularValues();
  if (sv(0) < 1e-12 || sv(2) / sv(0) < 1e-6) {
    throw DegenerateConfiguration("solve_pnp: 3d points are (near-)coplanar");
  }

  // Normalized camera coordinates.
  std::vector<Vec2> xn(n);
  for (int i = 0; i < n; ++i) {
    xn[i] = {(pts2d[i].x() - cam.cx) / cam.fx, (pts2d[i].y() - cam.cy) / cam.fy};
  }

  // Similarity normalization: centroid to origin, mean norm sqrt(3) / sqrt(2).
  double scale3 = 0.0;
  for (int i = 0; i < n; ++i) scale3 += (pts3d[i] - c3).norm();
  scale3 = std::sqrt(3.0) / std::max(scale3 / n, 1e-12);
  Vec2 c2 = Vec2::Zero();
  for (const auto &x : xn) c2 += x;
  c2 /= n;
  double scale2 = 0.0;
  for (const auto &x : xn) scale2 += (x - c2).norm();
  scale2 = std::sqrt(2.0) / std::max(scale2 / n, 1e-12);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 12);
  for (int i = 0; i < n; ++i) {
    const Vec3 p = scale3 * (pts3d[i] - c3);
    const Vec2 x = scale2 * (xn[i] - c2);
    Eigen::RowVector4d ph(p.x(), p.y(), p.z(), 1.0);
    a.block<1, 4>(2 * i, 0) = ph;
    a.block<1, 4>(2 * i, 8) = -x.x() * ph;
    a.block<1, 4>(2 * i + 1, 4) = ph;
    a.block<1, 4>(2 * i + 1, 8) = -x.y() * ph;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::VectorXd m = svd.matrixV().col(11);

  Eigen::Matrix<double, 3, 4> mn;
  mn.row(0) = m.segment<4>(0).transpose();
  mn.row(1) = m.segment<4>(4).transpose();
  mn.row(2) = m.segment<4>(8).transpose();

  // Undo both normalizations: x = T2^-1 * Mn * T3.
  Eigen::Matrix3d t2inv = Eigen::Matrix3d::Identity();
  t2inv(0, 0) = 1.0 / scale2;
  t2inv(1, 1) = 1.0 / scale2;
  t2inv(0, 2) = c2.x();
  t2inv(1, 2) = c2.y();
  Eigen::Matrix4d t3 = Eigen::Matrix4d::Identity();
  t3.block<3, 3>(0, 0) *= scale3;
  t3.block<3, 1>(0, 3) = -scale3 * c3;
  Eigen::Matrix<double, 3, 4> proj = t2inv * mn * t3;

  // Majority of the points must end up in front of the camera.
  int pos = 0;
  for (int i = 0; i < n; ++i) {
    const double w = proj.row(2).dot(pts3d[i].homogeneous());
    pos += (w > 0.0) ? 1 : -1;
  }
  if (pos < 0) proj = -proj;

  const double lambda = proj.block<1, 3>(2, 0).norm();
  if (lambda < 1e-12 || !proj.allFinite()) {
    throw DegenerateConfiguration("solve_pnp: DLT produced a singular projection");
  }
  proj /= lambda;

  *r_out = Rotation3::project_nearest(proj.block<3, 3>(0, 0)).matrix();
  *t_out = proj.col(3);
}

}  // namespace

Pose6Dof solve_pnp(const std::vector<Vec3> &pts3d, const std::vector<Vec2> &pts2d,
                   const PerspectiveCamera &cam,
                   const std::optional<Pose6Dof> &prior) {
  if (pts3d.size() != pts2d.size()) {
    throw DimensionMismatch("solve_pnp: point count mismatch");
  }
  const int n = static_cast<int>(pts3d.size());
  const int min_points = prior ? 4 : 6;
  if (n < min_points) {
    throw DegenerateConfiguration("solve_pnp: need at least " +
                                  std::to_string(min_points) + " correspondences");
  }
  check_finite(pts3d, "solve_pnp");
  check_finite(pts2d, "solve_pnp");

  Mat3 r;
  Vec3 t;
  if (prior) {
    r = prior->rotation.matrix();
    t = prior->translation;
  } else {
    dlt_init(pts3d, pts2d, cam, &r, &t);
  }

  auto residual = [&](const Mat3 &rr, const Vec3 &tt, Eigen::VectorXd *out) {
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 p = rr * pts3d[i] + tt;
      const Vec2 d(cam.fx * p.x() / p.z() + cam.cx - pts2d[i].x(),
                   cam.fy * p.y() / p.z() + cam.cy - pts2d[i].y());
      if (out) out->segment<2>(2 * i) = d;
      e += d.squaredNorm();
    }
    return e;
  };

  Eigen::VectorXd res(2 * n);
  double err = residual(r, t, &res);
  auto make_pose = [&](const Mat3 &rr, const Vec3 &tt) {
    Pose6Dof pose;
    pose.rotation = Rotation3::project_nearest(rr);
    pose.translation = tt;
    return pose;
  };
  if (!std::isfinite(err)) {
    throw PnpNotConverged("solve_pnp: initialization lies behind the camera",
                          make_pose(r, t), err);
  }

  for (int iter = 0; iter < 100; ++iter) {
    Eigen::MatrixXd jac(2 * n, 6);
    for (int i = 0; i < n; ++i) {
      const Vec3 q = r * pts3d[i];
      const Vec3 p = q + t;
      Eigen::Matrix<double, 2, 3> duv;
      duv << cam.fx / p.z(), 0, -cam.fx * p.x() / (p.z() * p.z()),
          0, cam.fy / p.z(), -cam.fy * p.y() / (p.z() * p.z());
      jac.block<2, 3>(2 * i, 0) = duv * (-skew(q));
      jac.block<2, 3>(2 * i, 3) = duv;
    }
    const Eigen::Matrix<double, 6, 6> h = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> g = jac.transpose() * res;
    Eigen::Matrix<double, 6, 1> delta = h.ldlt().solve(-g);
    if (!delta.allFinite()) {
      throw PnpNotConverged("solve_pnp: normal equations are singular",
                            make_pose(r, t), err);
    }

    // Step halving keeps the error monotone.
    double new_err = err;
    Mat3 new_r;
    Vec3 new_t;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      new_r = Rotation3::from_axis_angle(delta.head<3>()).matrix() * r;
      new_t = t + delta.tail<3>();
      new_err = residual(new_r, new_t, nullptr);
      if (std::isfinite(new_err) && new_err <= err) {
        improved = true;
        break;
      }
      delta /= 2.0;
    }
    if (!improved) break;

    const double drop = err - new_err;
    r = new_r;
    t = new_t;
    err = new_err;
    residual(r, t, &res);
    if (drop < 1e-10) break;
  }

  return make_pose(r, t);
}

std::pair<std::vector<Vec3>, SimilarityTransform> procrustes_align(
    const std::vector<Vec3> &pred, const std::vector<Vec3> &gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw DimensionMismatch("procrustes_align: point count mismatch");
  }
  check_finite(pred, "procrustes_align");
  check_finite(gt, "procrustes_align");
  const double n = static_cast<double>(pred.size());

  Vec3 mu_p = Vec3::Zero(), mu_g = Vec3::Zero();
  for (size_t i = 0; i < pred.size(); ++i) {
    mu_p += pred[i];
    mu_g += gt[i];
  }
  mu_p /= n;
  mu_g /= n;

  double var_p = 0.0, var_g = 0.0;
  Mat3 cov = Mat3::Zero();
  for (size_t i = 0; i < pred.size(); ++i) {
    const Vec3 x = pred[i] - mu_p;
    const Vec3 y = gt[i] - mu_g;
    var_p += x.squaredNorm();
    var_g += y.squaredNorm();
    cov += y * x.transpose();
  }
  var_p /= n;
  var_g /= n;
  cov /= n;
  if (var_p < 1e-12 || var_g < 1e-12) {
    throw DegenerateConfiguration("procrustes_align: zero-variance point cloud");
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 s = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) s(2, 2) = -1.0;

  SimilarityTransform xf;
  xf.rotation = Rotation3::from_matrix(svd.matrixU() * s * svd.matrixV().transpose());
  xf.scale = svd.singularValues().cwiseProduct(s.diagonal()).sum() / var_p;
  xf.translation = mu_g - xf.scale * xf.rotation.apply(mu_p);

  std::vector<Vec3> aligned;
  aligned.reserve(pred.size());
  for (const auto &p : pred) aligned.push_back(xf.apply(p));
  return {std::move(aligned), xf};
}

double iou(const Box2 &a, const Box2 &b) {
  const double iw = std::min(a.max.x(), b.max.x()) - std::max(a.min.x(), b.min.x());
  const double ih = std::min(a.max.y(), b.max.y()) - std::max(a.min.y(), b.min.y());
  const double inter = std::max(iw, 0.0) * std::max(ih, 0.0);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

Box2 bbox_of_points(const std::vector<Vec2> &points) {
  if (points.empty()) throw DimensionMismatch("bbox_of_points: empty point set");
  check_finite(points, "bbox_of_points");
  Vec2 mn = points[0], mx = points[0];
  for (const auto &p : points) {
    mn = mn.cwiseMin(p);
    mx = mx.cwiseMax(p);
  }
  return Box2(mn, mx);
}

}  // namespace hopose

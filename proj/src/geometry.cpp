#include "mvfund/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace mvfund {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flips v so its largest-magnitude entry is positive.
Vec3 fix_sign(Vec3 v) {
  int idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0.0) v = -v;
  return v;
}

double condition_number(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M);
  const double smin = svd.singularValues()(2);
  if (smin <= 0.0) return kInf;
  return svd.singularValues()(0) / smin;
}

}  // namespace

Vec4 ProjectiveCamera::center() const {
  Eigen::JacobiSVD<Mat34> svd(P, Eigen::ComputeFullV);
  Vec4 c = svd.matrixV().col(3);
  int idx = 0;
  c.cwiseAbs().maxCoeff(&idx);
  if (c[idx] < 0.0) c = -c;
  return c;
}

Mat3 skew(const Vec3& t) {
  Mat3 M;
  M << 0.0, -t.z(), t.y(),
      t.z(), 0.0, -t.x(),
      -t.y(), t.x(), 0.0;
  return M;
}

Vec3 unskew(const Mat3& M) {
  const Mat3 A = 0.5 * (M - M.transpose());
  return Vec3(A(2, 1), A(0, 2), A(1, 0));
}

Mat3 compose_fundamental(const Mat3& V_i, const Vec3& t_i,
                         const Mat3& V_j, const Vec3& t_j) {
  if (condition_number(V_i) > 1e12 || condition_number(V_j) > 1e12)
    throw SingularViewMatrix("view matrix condition number exceeds 1e12");
  return V_i * (skew(t_i) - skew(t_j)) * V_j.transpose();
}

Mat3 fundamental_from_projections(const ProjectiveCamera& P_i,
                                  const ProjectiveCamera& P_j) {
  const Vec4 C_j = P_j.center();
  const Vec3 e = P_i.P * C_j;
  const Eigen::Matrix<double, 4, 3> P_j_pinv =
      P_j.P.completeOrthogonalDecomposition().pseudoInverse();
  return skew(e) * (P_i.P * P_j_pinv);
}

std::pair<Vec3, Vec3> epipoles(const Mat3& F, double rank3_tol) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) / s(0) < 1e-9)
    throw RankDeficiencyError("matrix has rank < 2");
  if (s(2) / s(0) > rank3_tol)
    throw RankDeficiencyError("matrix has rank 3, no null space");
  const Vec3 e_left = fix_sign(svd.matrixU().col(2));
  const Vec3 e_right = fix_sign(svd.matrixV().col(2));
  return {e_left, e_right};
}

MatX svp(const MatX& A, int p) {
  if (p >= std::min(A.rows(), A.cols())) return A;
  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  return svd.matrixU().leftCols(p) * s.head(p).asDiagonal() *
         svd.matrixV().leftCols(p).transpose();
}

Mat3 hartley_normalization(const std::vector<Vec2>& points,
                           NormalizationMode mode) {
  if (points.size() < 2)
    throw DegenerateCloud("need at least two points to normalize");

  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Vec2 var = Vec2::Zero();
  for (const Vec2& p : points) var += (p - mean).cwiseAbs2();
  var /= static_cast<double>(points.size());

  const double sx = std::sqrt(var.x());
  const double sy = std::sqrt(var.y());
  const double s_iso = std::sqrt(0.5 * (var.x() + var.y()));
  if (s_iso < 1e-14) throw DegenerateCloud("all points coincide");

  if (mode == NormalizationMode::kAuto) {
    const double ratio = std::min(sx, sy) / std::max(sx, sy);
    mode = ratio < 0.4 ? NormalizationMode::kAnisotropic
                       : NormalizationMode::kIsotropic;
  }

  double fx = 1.0 / s_iso, fy = 1.0 / s_iso;
  if (mode == NormalizationMode::kAnisotropic) {
    // A flat axis falls back to the isotropic scale; it cannot reach unit
    // variance either way.
    fx = sx > 1e-14 ? 1.0 / sx : 1.0 / s_iso;
    fy = sy > 1e-14 ? 1.0 / sy : 1.0 / s_iso;
  }

  Mat3 N;
  N << fx, 0.0, -fx * mean.x(),
      0.0, fy, -fy * mean.y(),
      0.0, 0.0, 1.0;
  return N;
}

Mat3 eight_point(const std::vector<Correspondence>& corrs) {
  if (corrs.size() < 8)
    throw DegenerateConfiguration("eight-point needs >= 8 correspondences");
  for (const Correspondence& c : corrs) {
    if (c.view_a != corrs.front().view_a || c.view_b != corrs.front().view_b)
      throw std::invalid_argument("correspondences span multiple view pairs");
  }

  std::vector<Vec2> pts_a, pts_b;
  pts_a.reserve(corrs.size());
  pts_b.reserve(corrs.size());
  for (const Correspondence& c : corrs) {
    pts_a.push_back(c.x_a);
    pts_b.push_back(c.x_b);
  }
  const Mat3 N_a = hartley_normalization(pts_a);
  const Mat3 N_b = hartley_normalization(pts_b);

  // Design matrix: each match contributes the row vec(x_a' x_b'^T) against
  // vec(F). The SVD must run on A itself; forming A^T A floors the small
  // singular values near sqrt(eps) and blinds the degeneracy gate.
  MatX A(corrs.size(), 9);
  for (size_t idx = 0; idx < corrs.size(); ++idx) {
    const Vec3 xa = N_a * homogeneous(corrs[idx].x_a);
    const Vec3 xb = N_b * homogeneous(corrs[idx].x_b);
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) A(idx, 3 * r + col) = xa(r) * xb(col);
  }

  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || s(7) / s(0) < 1e-12)
    throw DegenerateConfiguration("degenerate correspondence configuration");

  const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  Mat3 Fn;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) Fn(r, col) = f(3 * r + col);

  Fn = svp(Fn, 2);
  Mat3 F = N_a.transpose() * Fn * N_b;
  F /= F.norm();
  int idx = 0;
  Eigen::Map<const Eigen::Matrix<double, 9, 1>>(F.data()).cwiseAbs().maxCoeff(&idx);
  if (F.data()[idx] < 0.0) F = -F;
  return F;
}

double symmetric_epipolar_distance(const Mat3& F, const Vec2& x_i,
                                   const Vec2& x_j) {
  const Vec3 xi = homogeneous(x_i);
  const Vec3 xj = homogeneous(x_j);
  const Vec3 l_i = F * xj;              // epipolar line in image i
  const Vec3 l_j = F.transpose() * xi;  // epipolar line in image j
  const double a2 = l_i.head<2>().squaredNorm();
  const double b2 = l_j.head<2>().squaredNorm();
  if (a2 < 1e-300 && b2 < 1e-300) return kInf;
  const double e = xi.dot(l_i);
  if (e == 0.0) return 0.0;
  return e * e * (1.0 / a2 + 1.0 / b2);
}

Vec4 triangulate_point(const std::vector<ProjectiveCamera>& cams,
                       const std::vector<Vec2>& obs) {
  if (cams.size() != obs.size())
    throw std::invalid_argument("camera/observation count mismatch");
  if (cams.size() < 2) throw InsufficientViews("triangulation needs >= 2 views");

  MatX A(2 * cams.size(), 4);
  for (size_t v = 0; v < cams.size(); ++v) {
    const Mat34& P = cams[v].P;
    A.row(2 * v) = obs[v].x() * P.row(2) - P.row(0);
    A.row(2 * v + 1) = obs[v].y() * P.row(2) - P.row(1);
  }

  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  // A nullspace of dimension two (coincident rays) is as degenerate as a
  // closing sigma4/sigma3 gap.
  if (!(s(2) > 1e-12 * s(0)) || s(3) / s(2) > 0.99)
    throw DegenerateRays("triangulation direction is ill determined");
  Vec4 X = svd.matrixV().col(3);
  int idx = 0;
  X.cwiseAbs().maxCoeff(&idx);
  if (X[idx] < 0.0) X = -X;
  return X;
}

}  // namespace mvfund

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace mvfund {

using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using MatX = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Unordered view triple, stored sorted ascending.
using Triplet = std::array<int, 3>;

/// A projective camera, a 3x4 matrix defined up to scale.
struct ProjectiveCamera {
  Mat34 P = Mat34::Zero();

  ProjectiveCamera() = default;
  explicit ProjectiveCamera(const Mat34& p) : P(p) {}

  /// Homogeneous projection of a 4-vector point.
  Vec3 project_h(const Vec4& X) const { return P * X; }

  /// Pixel projection; the caller guarantees nonzero depth.
  Vec2 project(const Vec4& X) const {
    const Vec3 x = P * X;
    return Vec2(x.x() / x.z(), x.y() / x.z());
  }

  /// Camera center as the unit-norm null vector of P.
  Vec4 center() const;
};

/// Camera parameters in the V/t factorization, P = V^{-T} [I | -t].
struct CameraParams {
  Mat3 V = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Mat34 matrix() const {
    const Mat3 Vinv_t = V.inverse().transpose();
    Mat34 P;
    P.leftCols<3>() = Vinv_t;
    P.col(3) = -Vinv_t * t;
    return P;
  }
  ProjectiveCamera camera() const { return ProjectiveCamera(matrix()); }
};

/// A point match between two views, pixel coordinates.
struct Correspondence {
  int view_a = 0;
  int view_b = 0;
  Vec2 x_a = Vec2::Zero();
  Vec2 x_b = Vec2::Zero();
};

/// Per-image metadata used by the collinearity score.
struct ImageMeta {
  int view = 0;
  double width = 0.0;
  double height = 0.0;
  Vec2 center = Vec2::Zero();

  ImageMeta() = default;
  ImageMeta(int v, double w, double h)
      : view(v), width(w), height(h), center(w / 2.0, h / 2.0) {}
  ImageMeta(int v, double w, double h, const Vec2& c)
      : view(v), width(w), height(h), center(c) {}
};

/// One 2D observation of a track.
struct Observation {
  int view = 0;
  Vec2 xy = Vec2::Zero();
};

/// A multi-view point track.
struct Track {
  std::vector<Observation> obs;
};

inline Vec3 homogeneous(const Vec2& x) { return Vec3(x.x(), x.y(), 1.0); }

inline Triplet make_triplet(int a, int b, int c) {
  Triplet t{a, b, c};
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace mvfund

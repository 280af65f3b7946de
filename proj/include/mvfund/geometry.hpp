#pragma once

#include <utility>
#include <vector>

#include "mvfund/errors.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

/// Cross-product matrix [t]x with skew(t) * v == t x v.
Mat3 skew(const Vec3& t);

/// Axis of the skew part: returns t with skew(t) == (M - M^T) / 2.
Vec3 unskew(const Mat3& M);

/// Pairwise fundamental matrix V_i (skew(t_i) - skew(t_j)) V_j^T.
/// Throws SingularViewMatrix when either view matrix is ill conditioned.
Mat3 compose_fundamental(const Mat3& V_i, const Vec3& t_i,
                         const Mat3& V_j, const Vec3& t_j);

/// Fundamental matrix of two arbitrary projective cameras so that
/// x_i^T F x_j = 0 for projections x_i, x_j of a common point.
Mat3 fundamental_from_projections(const ProjectiveCamera& P_i,
                                  const ProjectiveCamera& P_j);

/// Unit-norm left/right null vectors of a rank-2 matrix, sign fixed so the
/// largest-magnitude entry is positive. For F_ij the right vector is the
/// epipole in image j (projection of center i) and the left vector the
/// epipole in image i. Throws RankDeficiencyError when the numeric rank is
/// not 2: sigma2/sigma1 < 1e-9 or sigma3/sigma1 > rank3_tol.
std::pair<Vec3, Vec3> epipoles(const Mat3& F, double rank3_tol = 1e-6);

/// Best rank-p approximation in Frobenius norm (truncated SVD).
MatX svp(const MatX& A, int p);

enum class NormalizationMode { kIsotropic, kAnisotropic, kAuto };

/// Affine conditioning transform: transformed points have zero mean and unit
/// variance (per axis in anisotropic mode). kAuto switches to anisotropic
/// when the per-axis std ratio drops below 0.4.
Mat3 hartley_normalization(const std::vector<Vec2>& points,
                           NormalizationMode mode = NormalizationMode::kAuto);

/// Normalized eight-point estimate: unit-Frobenius rank-2 matrix minimizing
/// the algebraic epipolar error x_a^T F x_b over the correspondences.
Mat3 eight_point(const std::vector<Correspondence>& corrs);

/// (x_i^T F x_j)^2 (1/|l_j|^2 + 1/|l_i|^2) with l_j = (F x_j)_{1:2} and
/// l_i = (F^T x_i)_{1:2}; +infinity when both epipolar lines degenerate.
double symmetric_epipolar_distance(const Mat3& F, const Vec2& x_i,
                                   const Vec2& x_j);

/// Linear (DLT) triangulation; returns the unit-norm homogeneous point.
Vec4 triangulate_point(const std::vector<ProjectiveCamera>& cams,
                       const std::vector<Vec2>& obs);

}  // namespace mvfund

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mvfund/errors.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

/// Symmetric 3n x 3n block matrix of pairwise fundamental matrices with a
/// known-block mask. Symmetry (F_ji = F_ij^T) and zero diagonal blocks are
/// maintained structurally: only upper blocks are written, mirrors follow.
class NViewFundamental {
 public:
  enum class BlockCheck { kRankTwo, kNone };

  explicit NViewFundamental(int n)
      : n_(n), data_(MatX::Zero(3 * n, 3 * n)), known_(n * n, false) {}

  static NViewFundamental from_blocks(
      int n, const std::map<std::pair<int, int>, Mat3>& blocks,
      BlockCheck check = BlockCheck::kRankTwo);

  int views() const { return n_; }
  const MatX& matrix() const { return data_; }

  Mat3 block(int i, int j) const { return data_.block<3, 3>(3 * i, 3 * j); }
  bool is_known(int i, int j) const { return known_[i * n_ + j]; }
  bool fully_known() const;
  int known_pair_count() const;

  /// Writes F_ij and mirrors F_ji = F_ij^T; i != j required.
  void set_block(int i, int j, const Mat3& F_ij);

  /// 3 x 3n block row F_i.
  Eigen::Matrix<double, 3, Eigen::Dynamic> block_row(int i) const {
    return data_.middleRows<3>(3 * i);
  }

  /// 9x9 submatrix of the triplet (diagonal blocks zero).
  Mat9 triplet_submatrix(const Triplet& t) const;

  /// Known (i, j) pairs with i < j, lexicographic order.
  std::vector<std::pair<int, int>> known_pairs() const;

  /// Throws RankDeficiencyError unless every known block has rank 2.
  void validate_block_ranks(double tol = 1e-9) const;

 private:
  int n_;
  MatX data_;
  std::vector<bool> known_;
};

/// Outcome of the rank/eigenvalue consistency characterization.
struct ConsistencyReport {
  int rank_of_F = 0;
  double sigma76_ratio = 0.0;           // sigma7 / sigma6 of F
  std::pair<int, int> eig_signature{0, 0};  // (positive, negative) counts
  std::vector<int> block_row_ranks;
  std::vector<double> block_row_gaps;   // sigma3 / sigma1 per block row
  bool block_ranks_ok = false;
  bool diagonal_ok = false;
  bool consistent = false;
};

/// Fully known n-view matrix of the cameras; every block is composed
/// pairwise. Throws SingularViewMatrix for ill-conditioned V_i.
NViewFundamental from_cameras(const std::vector<CameraParams>& cams);

/// Evaluates the consistency conditions: rank(F) = 6 with a (3, 3)
/// eigenvalue signature, every block row of rank 3, every block of rank 2,
/// zero diagonal. Throws IncompleteMatrix when blocks are missing.
ConsistencyReport check_consistency(const NViewFundamental& F,
                                    double tol = 1e-9);

/// Spectral split F = X X^T - Y Y^T from the three positive and three
/// negative eigenpairs. Throws SignatureError unless the signature is (3, 3).
std::pair<MatX, MatX> eig_split(const NViewFundamental& F, double tol = 1e-9);

/// U = (X - Y) / sqrt(2), V = (X + Y) / sqrt(2); then U V^T + V U^T = F.
std::pair<MatX, MatX> uv_factors(const MatX& X, const MatX& Y);

/// Camera recovery from a consistent matrix: eigen split, role
/// disambiguation so every V_i has rank 3, T_i = V_i^{-1} U_i projected to
/// its skew part. The output frame is fixed by the deterministic eigen
/// ordering and unique up to one 4x4 projective transform.
std::vector<CameraParams> extract_cameras(const NViewFundamental& F,
                                          double tol = 1e-9);

/// Per-view scales (s1, s2, s3) with s_i s_j = s_ij; inputs with an odd
/// number of negatives are first negated as a whole.
std::array<double, 3> rebalance_triplet_scales(double s12, double s13,
                                               double s23);

}  // namespace mvfund

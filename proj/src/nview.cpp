#include "mvfund/nview.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvfund/geometry.hpp"

namespace mvfund {

namespace {

// Columns flipped so each eigenvector's largest-magnitude entry is positive.
Eigen::VectorXd fix_column_sign(Eigen::VectorXd v) {
  int idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0.0) v = -v;
  return v;
}

int numeric_rank(const Eigen::VectorXd& singular_values, double tol) {
  const double smax = singular_values(0);
  if (!(smax > 0.0)) return 0;
  int rank = 0;
  for (int k = 0; k < singular_values.size(); ++k)
    if (singular_values(k) / smax >= tol) ++rank;
  return rank;
}

}  // namespace

NViewFundamental NViewFundamental::from_blocks(
    int n, const std::map<std::pair<int, int>, Mat3>& blocks,
    BlockCheck check) {
  NViewFundamental F(n);
  for (const auto& [pair, M] : blocks) F.set_block(pair.first, pair.second, M);
  if (check == BlockCheck::kRankTwo) F.validate_block_ranks();
  return F;
}

bool NViewFundamental::fully_known() const {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (!is_known(i, j)) return false;
  return true;
}

int NViewFundamental::known_pair_count() const {
  int count = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (is_known(i, j)) ++count;
  return count;
}

void NViewFundamental::set_block(int i, int j, const Mat3& F_ij) {
  if (i == j) throw std::invalid_argument("diagonal blocks are fixed to zero");
  data_.block<3, 3>(3 * i, 3 * j) = F_ij;
  data_.block<3, 3>(3 * j, 3 * i) = F_ij.transpose();
  known_[i * n_ + j] = true;
  known_[j * n_ + i] = true;
}

Mat9 NViewFundamental::triplet_submatrix(const Triplet& t) const {
  Mat9 S = Mat9::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) S.block<3, 3>(3 * a, 3 * b) = block(t[a], t[b]);
  return S;
}

std::vector<std::pair<int, int>> NViewFundamental::known_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (is_known(i, j)) pairs.emplace_back(i, j);
  return pairs;
}

void NViewFundamental::validate_block_ranks(double tol) const {
  for (const auto& [i, j] : known_pairs()) {
    Eigen::JacobiSVD<Mat3> svd(block(i, j));
    const Vec3 s = svd.singularValues();
    const bool rank2 = s(0) > 0.0 && s(1) / s(0) >= tol && s(2) / s(0) < tol;
    if (!rank2)
      throw RankDeficiencyError("block (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") does not have rank 2");
  }
}

NViewFundamental from_cameras(const std::vector<CameraParams>& cams) {
  const int n = static_cast<int>(cams.size());
  NViewFundamental F(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      F.set_block(i, j, compose_fundamental(cams[i].V, cams[i].t,
                                            cams[j].V, cams[j].t));
  return F;
}

ConsistencyReport check_consistency(const NViewFundamental& F, double tol) {
  if (!F.fully_known())
    throw IncompleteMatrix("consistency check needs every block");

  ConsistencyReport report;
  const int n = F.views();

  Eigen::JacobiSVD<MatX> svd(F.matrix());
  const Eigen::VectorXd s = svd.singularValues();
  report.rank_of_F = numeric_rank(s, tol);
  report.sigma76_ratio = s.size() > 6 && s(5) > 0.0 ? s(6) / s(5) : 0.0;

  Eigen::SelfAdjointEigenSolver<MatX> eig(F.matrix(), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  int pos = 0, neg = 0;
  for (int k = 0; k < lambda.size(); ++k) {
    if (lmax <= 0.0 || std::abs(lambda(k)) / lmax < tol) continue;
    (lambda(k) > 0.0 ? pos : neg) += 1;
  }
  report.eig_signature = {pos, neg};

  report.block_row_ranks.resize(n);
  report.block_row_gaps.resize(n);
  bool rows_ok = true;
  for (int i = 0; i < n; ++i) {
    Eigen::JacobiSVD<MatX> row_svd(F.block_row(i));
    const Eigen::VectorXd rs = row_svd.singularValues();
    report.block_row_ranks[i] = numeric_rank(rs, tol);
    report.block_row_gaps[i] = rs(0) > 0.0 ? rs(2) / rs(0) : 0.0;
    rows_ok = rows_ok && report.block_row_ranks[i] == 3;
  }

  report.block_ranks_ok = true;
  for (int i = 0; i < n && report.block_ranks_ok; ++i) {
    for (int j = i + 1; j < n && report.block_ranks_ok; ++j) {
      Eigen::JacobiSVD<Mat3> bsvd(F.block(i, j));
      const Vec3 bs = bsvd.singularValues();
      report.block_ranks_ok =
          bs(0) > 0.0 && bs(1) / bs(0) >= tol && bs(2) / bs(0) < tol;
    }
  }

  report.diagonal_ok = true;
  for (int i = 0; i < n; ++i)
    report.diagonal_ok =
        report.diagonal_ok && F.block(i, i).cwiseAbs().maxCoeff() == 0.0;

  report.consistent = report.rank_of_F == 6 &&
                      report.eig_signature == std::make_pair(3, 3) &&
                      rows_ok && report.block_ranks_ok && report.diagonal_ok;
  return report;
}

std::pair<MatX, MatX> eig_split(const NViewFundamental& F, double tol) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(F.matrix());
  const Eigen::VectorXd lambda = eig.eigenvalues();  // ascending
  const int dim = static_cast<int>(lambda.size());

  // Rank-6 part = the six largest |lambda|. They must carry real signal,
  // sit above a clear spectral gap, and split into three of each sign.
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&lambda](int a, int b) {
    const double la = std::abs(lambda(a)), lb = std::abs(lambda(b));
    return la != lb ? la > lb : a < b;
  });
  const double lmax = std::abs(lambda(order[0]));
  if (dim < 6 || lmax <= 0.0 || std::abs(lambda(order[5])) / lmax < tol)
    throw SignatureError("matrix has numeric rank below 6");
  if (dim > 6) {
    const double gap_bound =
        std::max(tol * lmax, 0.1 * std::abs(lambda(order[5])));
    if (std::abs(lambda(order[6])) > gap_bound)
      throw SignatureError("no rank-6 spectral gap");
  }

  std::vector<int> pos, neg;
  for (int k = 0; k < 6; ++k)
    (lambda(order[k]) > 0.0 ? pos : neg).push_back(order[k]);
  if (pos.size() != 3 || neg.size() != 3)
    throw SignatureError("eigenvalue signature is (" +
                         std::to_string(pos.size()) + ", " +
                         std::to_string(neg.size()) + "), expected (3, 3)");

  // Deterministic column order: descending |lambda| within each sign.
  MatX X(dim, 3), Y(dim, 3);
  for (int c = 0; c < 3; ++c) {
    X.col(c) = std::sqrt(lambda(pos[c])) *
               fix_column_sign(eig.eigenvectors().col(pos[c]));
    Y.col(c) = std::sqrt(-lambda(neg[c])) *
               fix_column_sign(eig.eigenvectors().col(neg[c]));
  }
  return {X, Y};
}

std::pair<MatX, MatX> uv_factors(const MatX& X, const MatX& Y) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  return {(X - Y) * inv_sqrt2, (X + Y) * inv_sqrt2};
}

std::vector<CameraParams> extract_cameras(const NViewFundamental& F,
                                          double tol) {
  const int n = F.views();
  auto [X, Y] = eig_split(F, tol);
  auto [U, V] = uv_factors(X, Y);

  // Either every V_i has rank 3 and every U_i rank 2, or the roles swap.
  const auto min_sigma3 = [n](const MatX& M) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      Eigen::JacobiSVD<Mat3> svd(Mat3(M.middleRows<3>(3 * i)));
      worst = std::min(worst, svd.singularValues()(2));
    }
    return worst;
  };
  if (min_sigma3(V) < min_sigma3(U)) std::swap(U, V);

  std::vector<CameraParams> cams(n);
  for (int i = 0; i < n; ++i) {
    const Mat3 V_i = V.middleRows<3>(3 * i);
    const Mat3 U_i = U.middleRows<3>(3 * i);
    Eigen::JacobiSVD<Mat3> svd(V_i);
    const Vec3 s = svd.singularValues();
    if (!(s(0) > 0.0) || s(2) / s(0) < 1e-9)
      throw RoleAmbiguity("no role assignment gives invertible V blocks");

    const Mat3 T = V_i.inverse() * U_i;
    const double norm = T.norm();
    if (norm > 0.0 && (T + T.transpose()).norm() / norm > 0.1)
      throw SkewnessViolation("V_i^{-1} U_i is far from skew for view " +
                              std::to_string(i));
    cams[i].V = V_i;
    cams[i].t = unskew(T);
  }
  return cams;
}

std::array<double, 3> rebalance_triplet_scales(double s12, double s13,
                                               double s23) {
  int negatives = (s12 < 0.0) + (s13 < 0.0) + (s23 < 0.0);
  if (negatives % 2 == 1) {
    s12 = -s12;
    s13 = -s13;
    s23 = -s23;
  }
  const double s1 = std::sqrt(s12 * s13 / s23);
  return {s1, s12 / s1, s13 / s1};
}

}  // namespace mvfund

#include "mvfund/admm.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "mvfund/errors.hpp"
#include "mvfund/geometry.hpp"
#include "mvfund/parallel.hpp"

namespace mvfund {

namespace {

// Local index of view v inside the sorted triplet.
int local_index(const Triplet& t, int v) {
  for (int a = 0; a < 3; ++a)
    if (t[a] == v) return a;
  throw std::logic_error("view not in triplet");
}

Mat9 rank6_projection(const Mat9& A) {
  Eigen::JacobiSVD<Mat9> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> s = svd.singularValues();
  s(6) = s(7) = s(8) = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double sigma76_ratio(const Mat9& A) {
  Eigen::JacobiSVD<Mat9> svd(A);
  const auto& s = svd.singularValues();
  return s(5) > 0.0 ? s(6) / s(5) : 0.0;
}

}  // namespace

void f_update(AdmmState& state, const NViewFundamental& measured,
              const std::vector<std::pair<int, int>>& edges, double alpha) {
  for (const auto& [i, j] : edges) {
    const auto it = state.multiplicity.find({i, j});
    if (it == state.multiplicity.end() || it->second == 0)
      throw UncoveredEdge("block (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is in no triplet");
    // Residual form of the closed-form average: algebraically
    //   sum_k [B_k + Gamma_k + alpha Fhat] / (N (1 + alpha)),
    // but exact at a feasible fixed point (B_k = Fhat, Gamma_k = 0).
    const Mat3 base = measured.block(i, j);
    Mat3 delta = Mat3::Zero();
    for (size_t k = 0; k < state.triplets.size(); ++k) {
      const Triplet& t = state.triplets[k];
      if (t[0] != i && t[1] != i && t[2] != i) continue;
      if (t[0] != j && t[1] != j && t[2] != j) continue;
      const int a = local_index(t, i);
      const int b = local_index(t, j);
      delta += state.B[k].block<3, 3>(3 * a, 3 * b) +
               state.Gamma[k].block<3, 3>(3 * a, 3 * b) - base;
    }
    state.F.set_block(i, j, base + delta / (it->second * (1.0 + alpha)));
  }
}

void b_update(AdmmState& state) {
  parallel_for(state.triplets.size(), [&](size_t k) {
    state.B[k] = rank6_projection(
        state.F.triplet_submatrix(state.triplets[k]) - state.Gamma[k]);
  });
}

void gamma_update(AdmmState& state) {
  parallel_for(state.triplets.size(), [&](size_t k) {
    state.Gamma[k] += state.B[k] - state.F.triplet_submatrix(state.triplets[k]);
  });
}

std::pair<NViewFundamental, AdmmDiagnostics> solve(
    const NViewFundamental& measured, const std::vector<Triplet>& triplets,
    const AdmmConfig& cfg) {
  if (triplets.empty()) throw std::invalid_argument("no triplets to optimize");
  if (cfg.alpha <= 0.0 || cfg.iterations < 1)
    throw std::invalid_argument("invalid solver configuration");

  AdmmState state(measured.views());
  state.F = measured;
  state.triplets = triplets;

  std::vector<std::pair<int, int>> edges;
  for (const Triplet& t : triplets) {
    for (const auto& [i, j] : {std::pair{t[0], t[1]}, std::pair{t[0], t[2]},
                               std::pair{t[1], t[2]}}) {
      if (!measured.is_known(i, j))
        throw IncompleteMatrix("triplet block (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") is not measured");
      if (state.multiplicity[{i, j}]++ == 0) edges.emplace_back(i, j);
    }
  }
  std::sort(edges.begin(), edges.end());

  state.B.reserve(triplets.size());
  state.Gamma.assign(triplets.size(), Mat9::Zero());
  for (const Triplet& t : triplets)
    state.B.push_back(measured.triplet_submatrix(t));

  AdmmDiagnostics diag;
  diag.primal_residuals.reserve(cfg.iterations);
  std::vector<double> residuals(triplets.size());

  for (int it = 0; it < cfg.iterations; ++it) {
    f_update(state, measured, edges, cfg.alpha);
    if (!state.F.matrix().allFinite())
      throw NonFinite("solver iterate left the finite range");
    b_update(state);
    gamma_update(state);

    double residual_sum = 0.0, scale_sum = 0.0;
    parallel_for(triplets.size(), [&](size_t k) {
      residuals[k] =
          (state.B[k] - state.F.triplet_submatrix(triplets[k])).norm();
    });
    for (size_t k = 0; k < triplets.size(); ++k) {
      residual_sum += residuals[k];
      scale_sum += state.F.triplet_submatrix(triplets[k]).norm();
    }
    const double mean_residual = residual_sum / triplets.size();
    diag.primal_residuals.push_back(mean_residual);
    diag.iterations_run = it + 1;
    diag.final_relative_residual =
        scale_sum > 0.0 ? residual_sum / scale_sum : mean_residual;

    if (cfg.early_stop_residual > 0.0 &&
        diag.final_relative_residual <= cfg.early_stop_residual)
      break;
  }

  double ratio_sum = 0.0;
  for (const Triplet& t : triplets) {
    const Mat9 sub = state.F.triplet_submatrix(t);
    ratio_sum += sigma76_ratio(sub);
    // The relaxation enforces neither the eigenvalue signs nor the block
    // ranks; surface violations instead of failing.
    Eigen::SelfAdjointEigenSolver<Mat9> eig(sub, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    const double lmax = lambda.cwiseAbs().maxCoeff();
    int pos = 0, neg = 0;
    for (int k = 0; k < 9; ++k) {
      if (lmax <= 0.0 || std::abs(lambda(k)) / lmax < 1e-6) continue;
      (lambda(k) > 0.0 ? pos : neg) += 1;
    }
    if (pos != 3 || neg != 3)
      diag.warnings.push_back("triplet (" + std::to_string(t[0]) + ", " +
                              std::to_string(t[1]) + ", " +
                              std::to_string(t[2]) + ") signature " +
                              std::to_string(pos) + "+/" +
                              std::to_string(neg) + "-");
  }
  diag.final_sigma76_mean = ratio_sum / triplets.size();
  return {std::move(state.F), std::move(diag)};
}

double triplet_consistency_score(const Mat9& measured_triplet,
                                 const AdmmConfig& cfg) {
  NViewFundamental measured(3);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      measured.set_block(a, b, measured_triplet.block<3, 3>(3 * a, 3 * b));
  const auto [fitted, diag] = solve(measured, {make_triplet(0, 1, 2)}, cfg);
  return (fitted.matrix() - measured.matrix()).norm();
}

}  // namespace mvfund

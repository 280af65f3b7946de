#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mvfund/nview.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

struct AdmmConfig {
  double alpha = 0.001;              // data-fit weight
  int iterations = 1000;
  double early_stop_residual = 1e-14;  // relative primal residual, 0 disables
};

/// Solver state: the current iterate, per-triplet rank-6 auxiliaries B_k,
/// multipliers Gamma_k, and the per-edge triplet multiplicity N_ij.
struct AdmmState {
  NViewFundamental F;
  std::vector<Triplet> triplets;
  std::vector<Mat9> B;
  std::vector<Mat9> Gamma;
  std::map<std::pair<int, int>, int> multiplicity;

  explicit AdmmState(int n) : F(n) {}
};

struct AdmmDiagnostics {
  std::vector<double> primal_residuals;  // mean ||B_k - F_tau(k)|| per iteration
  double final_relative_residual = 0.0;
  double final_sigma76_mean = 0.0;       // mean sigma7/sigma6 over triplets
  int iterations_run = 0;
  std::vector<std::string> warnings;     // post-hoc constraint monitoring
};

/// Closed-form data-fit step: every covered block (i, j) becomes
///   1 / (N_ij (1 + alpha)) * sum_k [B_k(i,j) + Gamma_k(i,j) + alpha Fhat(i,j)]
/// over the triplets containing the edge. Symmetry and the zero diagonal are
/// maintained structurally. Throws UncoveredEdge when an entry of `edges` is
/// in no triplet.
void f_update(AdmmState& state, const NViewFundamental& measured,
              const std::vector<std::pair<int, int>>& edges, double alpha);

/// Rank projection B_k = svp(F_tau(k) - Gamma_k, 6).
void b_update(AdmmState& state);

/// Dual ascent Gamma_k += B_k - F_tau(k).
void gamma_update(AdmmState& state);

/// Runs the alternating scheme from B_k = Fhat_tau(k), Gamma_k = 0. Measured
/// blocks outside the triplet cover pass through unchanged. Throws
/// IncompleteMatrix when a triplet references an unknown block and NonFinite
/// when an iterate stops being finite.
std::pair<NViewFundamental, AdmmDiagnostics> solve(
    const NViewFundamental& measured, const std::vector<Triplet>& triplets,
    const AdmmConfig& cfg = {});

/// Distance from a measured 9x9 triplet to its closest consistent fit,
/// computed by running the solver on the three-view problem alone.
double triplet_consistency_score(const Mat9& measured_triplet,
                                 const AdmmConfig& cfg);

}  // namespace mvfund

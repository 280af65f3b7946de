#include <doctest.h>

#include <mvfund/admm.hpp>
#include <mvfund/geometry.hpp>
#include <mvfund/rng.hpp>

#include "helpers.hpp"

using namespace mvfund;
using testutil::random_cameras;
using testutil::random_mat3;

namespace {

std::vector<Triplet> all_triplets(int n) {
  std::vector<Triplet> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) out.push_back(make_triplet(i, j, k));
  return out;
}

std::vector<Triplet> sample_triplets(int n, int count, Rng& rng) {
  auto all = all_triplets(n);
  for (size_t idx = all.size(); idx > 1; --idx)
    std::swap(all[idx - 1], all[rng.uniform_int(0, static_cast<int>(idx) - 1)]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

NViewFundamental perturbed_unit_blocks(const NViewFundamental& F, double sigma,
                                       Rng& rng) {
  NViewFundamental noisy(F.views());
  for (const auto& [i, j] : F.known_pairs()) {
    Mat3 B = F.block(i, j);
    B /= B.norm();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) B(r, c) += sigma * rng.normal();
    noisy.set_block(i, j, B);
  }
  return noisy;
}

AdmmState make_state(const NViewFundamental& measured,
                     const std::vector<Triplet>& triplets) {
  AdmmState state(measured.views());
  state.F = measured;
  state.triplets = triplets;
  for (const Triplet& t : triplets) {
    state.B.push_back(measured.triplet_submatrix(t));
    state.Gamma.push_back(Mat9::Zero());
    for (const auto& e : {std::pair{t[0], t[1]}, std::pair{t[0], t[2]},
                          std::pair{t[1], t[2]}})
      state.multiplicity[e] += 1;
  }
  return state;
}

}  // namespace

TEST_SUITE_BEGIN("admm");

TEST_CASE("f_update fixed point with matching contributions") {
  Rng rng(50);
  const Mat3 M = random_mat3(rng);
  NViewFundamental measured(3);
  measured.set_block(0, 1, M);
  measured.set_block(0, 2, random_mat3(rng));
  measured.set_block(1, 2, random_mat3(rng));

  auto state = make_state(measured, {make_triplet(0, 1, 2)});
  f_update(state, measured, {{0, 1}}, 1.0);
  CHECK((state.F.block(0, 1) - M).norm() == 0.0);
}

TEST_CASE("f_update averages distinct triplet contributions") {
  // Two triplets cover edge (0, 1) with B blocks M and 3M; with vanishing
  // alpha the update is their mean, 2M.
  Rng rng(51);
  const Mat3 M = random_mat3(rng);
  NViewFundamental measured(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) measured.set_block(i, j, M);

  auto state =
      make_state(measured, {make_triplet(0, 1, 2), make_triplet(0, 1, 3)});
  state.B[0].block<3, 3>(0, 3) = M;
  state.B[1].block<3, 3>(0, 3) = 3.0 * M;
  f_update(state, measured, {{0, 1}}, 1e-12);
  CHECK((state.F.block(0, 1) - 2.0 * M).norm() <= 1e-9 * M.norm());
}

TEST_CASE("f_update matches the closed form evaluated directly") {
  Rng rng(52);
  const double alpha = 0.37;
  NViewFundamental measured(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) measured.set_block(i, j, random_mat3(rng));

  const std::vector<Triplet> triplets{make_triplet(0, 1, 2),
                                      make_triplet(0, 1, 3),
                                      make_triplet(1, 2, 3)};
  auto state = make_state(measured, triplets);
  for (Mat9& B : state.B) B += Mat9::Random() * 0.1;
  for (Mat9& G : state.Gamma) G = 0.05 * Mat9::Random();
  const auto B_copy = state.B;
  const auto G_copy = state.Gamma;

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) edges.emplace_back(i, j);
  f_update(state, measured, edges, alpha);

  for (const auto& [i, j] : edges) {
    Mat3 sum = Mat3::Zero();
    int n_ij = 0;
    for (size_t k = 0; k < triplets.size(); ++k) {
      const Triplet& t = triplets[k];
      int a = -1, b = -1;
      for (int idx = 0; idx < 3; ++idx) {
        if (t[idx] == i) a = idx;
        if (t[idx] == j) b = idx;
      }
      if (a < 0 || b < 0) continue;
      sum += B_copy[k].block<3, 3>(3 * a, 3 * b) +
             G_copy[k].block<3, 3>(3 * a, 3 * b) + alpha * measured.block(i, j);
      ++n_ij;
    }
    const Mat3 expected = sum / (n_ij * (1.0 + alpha));
    CHECK((state.F.block(i, j) - expected).norm() <=
          1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("f_update keeps the matrix structurally symmetric") {
  Rng rng(53);
  NViewFundamental measured(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) measured.set_block(i, j, random_mat3(rng));
  auto state = make_state(measured, {make_triplet(0, 1, 2)});
  for (Mat9& B : state.B) B += Mat9::Random();
  f_update(state, measured, {{0, 1}, {0, 2}, {1, 2}}, 0.5);
  CHECK((state.F.matrix() - state.F.matrix().transpose()).norm() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(state.F.block(i, i).isZero(0.0));
}

TEST_CASE("f_update rejects uncovered edges") {
  Rng rng(54);
  NViewFundamental measured(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) measured.set_block(i, j, random_mat3(rng));
  auto state = make_state(measured, {make_triplet(0, 1, 2)});
  CHECK_THROWS_AS(f_update(state, measured, {{0, 3}}, 1.0), UncoveredEdge);
}

TEST_CASE("b_update keeps rank-6 inputs") {
  Rng rng(55);
  const auto F = from_cameras(random_cameras(3, rng));
  auto state = make_state(F, {make_triplet(0, 1, 2)});
  b_update(state);
  CHECK((state.B[0] - F.triplet_submatrix(make_triplet(0, 1, 2))).norm() <=
        1e-12);
}

TEST_CASE("b_update projects the identity at distance sqrt(3)") {
  NViewFundamental measured(3);
  auto state = make_state(measured, {make_triplet(0, 1, 2)});
  state.Gamma[0] = -Mat9::Identity();  // F_tau - Gamma = I
  b_update(state);
  CHECK(std::abs((Mat9::Identity() - state.B[0]).norm() - std::sqrt(3.0)) <=
        1e-12);
}

TEST_CASE("b_update output has numerical rank at most six") {
  Rng rng(56);
  NViewFundamental measured(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) measured.set_block(i, j, random_mat3(rng));
  auto state = make_state(measured, {make_triplet(0, 1, 2)});
  state.Gamma[0] = 0.3 * Mat9::Random();
  b_update(state);
  Eigen::JacobiSVD<Mat9> svd(state.B[0]);
  CHECK(svd.singularValues()(6) <= 1e-12 * svd.singularValues()(0));
}

TEST_CASE("gamma_update accumulates the primal residual") {
  Rng rng(57);
  NViewFundamental measured(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) measured.set_block(i, j, random_mat3(rng));
  auto state = make_state(measured, {make_triplet(0, 1, 2)});

  SUBCASE("zero residual leaves the multiplier") {
    state.B[0] = state.F.triplet_submatrix(make_triplet(0, 1, 2));
    gamma_update(state);
    CHECK(state.Gamma[0].isZero(0.0));
  }
  SUBCASE("first step stores the difference") {
    const Mat9 D = 0.1 * Mat9::Random();
    state.B[0] = state.F.triplet_submatrix(make_triplet(0, 1, 2)) + D;
    gamma_update(state);
    CHECK((state.Gamma[0] - D).norm() <= 1e-15);
  }
  SUBCASE("updates telescope") {
    Mat9 expected = Mat9::Zero();
    for (int step = 0; step < 5; ++step) {
      const Mat9 D = 0.1 * Mat9::Random();
      state.B[0] = state.F.triplet_submatrix(make_triplet(0, 1, 2)) + D;
      expected += D;
      gamma_update(state);
    }
    CHECK((state.Gamma[0] - expected).norm() <= 1e-13);
  }
}

TEST_CASE("solve returns a consistent measurement unchanged") {
  Rng rng(58);
  const auto F = from_cameras(random_cameras(5, rng));
  const auto [out, diag] = solve(F, all_triplets(5));
  CHECK((out.matrix() - F.matrix()).norm() <=
        1e-10 * F.matrix().norm());
  CHECK(diag.final_sigma76_mean <= 1e-12);
}

TEST_CASE("solve handles arbitrarily rescaled triplet blocks") {
  Rng rng(59);
  const auto F = from_cameras(random_cameras(3, rng));
  NViewFundamental scaled(3);
  scaled.set_block(0, 1, Mat3(3.7 * F.block(0, 1)));
  scaled.set_block(0, 2, Mat3(-0.4 * F.block(0, 2)));
  scaled.set_block(1, 2, Mat3(1.9 * F.block(1, 2)));
  const auto [out, diag] = solve(scaled, {make_triplet(0, 1, 2)});
  CHECK(diag.final_sigma76_mean <= 1e-10);
}

TEST_CASE("solve enforces rank six on noisy ten-view problems") {
  Rng rng(60);
  const auto F = from_cameras(random_cameras(10, rng));
  const auto noisy = perturbed_unit_blocks(F, 1e-3, rng);
  const auto triplets = sample_triplets(10, 15, rng);
  const AdmmConfig cfg{0.001, 1000, 0.0};
  const auto [out, diag] = solve(noisy, triplets, cfg);
  CHECK(diag.final_sigma76_mean <= 1e-10);
  CHECK(diag.iterations_run == 1000);
  // Residual decays by at least six orders of magnitude.
  CHECK(diag.primal_residuals.back() <=
        1e-6 * diag.primal_residuals.front());
  // Pass-through: blocks outside the cover stay untouched.
  for (const auto& [i, j] : noisy.known_pairs()) {
    bool covered = false;
    for (const Triplet& t : triplets) {
      int hits = 0;
      for (int v : t) hits += v == i || v == j;
      covered = covered || hits == 2;
    }
    if (!covered)
      CHECK((out.block(i, j) - noisy.block(i, j)).norm() == 0.0);
  }
}

TEST_CASE("large alpha pins the iterate to the measurement") {
  Rng rng(61);
  const auto F = from_cameras(random_cameras(4, rng));
  const auto noisy = perturbed_unit_blocks(F, 1e-2, rng);
  const AdmmConfig cfg{1e6, 3, 0.0};
  const auto [out, diag] = solve(noisy, all_triplets(4), cfg);
  for (const auto& [i, j] : noisy.known_pairs())
    CHECK((out.block(i, j) - noisy.block(i, j)).norm() <=
          1e-4 * noisy.block(i, j).norm());
}

TEST_CASE("solve is deterministic") {
  Rng rng(62);
  const auto F = from_cameras(random_cameras(6, rng));
  const auto noisy = perturbed_unit_blocks(F, 1e-3, rng);
  const auto triplets = sample_triplets(6, 8, rng);
  const AdmmConfig cfg{0.001, 50, 0.0};
  const auto [a, da] = solve(noisy, triplets, cfg);
  const auto [b, db] = solve(noisy, triplets, cfg);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  CHECK(da.primal_residuals == db.primal_residuals);

  // Worker count must not change any bit of the result.
  ::setenv("MVFUND_THREADS", "4", 1);
  const auto [c, dc] = solve(noisy, triplets, cfg);
  ::unsetenv("MVFUND_THREADS");
  CHECK((a.matrix() - c.matrix()).norm() == 0.0);
  CHECK(da.primal_residuals == dc.primal_residuals);
}

TEST_CASE("solve rejects missing blocks and non-finite input") {
  Rng rng(63);
  NViewFundamental partial(4);
  partial.set_block(0, 1, random_mat3(rng));
  CHECK_THROWS_AS(solve(partial, {make_triplet(0, 1, 2)}), IncompleteMatrix);

  auto F = from_cameras(random_cameras(3, rng));
  Mat3 bad = F.block(0, 1);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  F.set_block(0, 1, bad);
  CHECK_THROWS_AS(solve(F, {make_triplet(0, 1, 2)}), NonFinite);
}

TEST_CASE("solve requires triplets") {
  Rng rng(64);
  const auto F = from_cameras(random_cameras(3, rng));
  CHECK_THROWS_AS(solve(F, {}), std::invalid_argument);
}

TEST_CASE("triplet_consistency_score separates clean and corrupt input") {
  Rng rng(65);
  const auto F = from_cameras(random_cameras(3, rng));
  const Mat9 clean = F.triplet_submatrix(make_triplet(0, 1, 2));
  const AdmmConfig cfg{0.001, 50, 1e-14};
  CHECK(triplet_consistency_score(clean, cfg) <= 1e-10);

  // Per-block rescaling keeps the triplet consistent.
  NViewFundamental scaled(3);
  scaled.set_block(0, 1, Mat3(5.0 * F.block(0, 1)));
  scaled.set_block(0, 2, Mat3(0.2 * F.block(0, 2)));
  scaled.set_block(1, 2, Mat3(-2.0 * F.block(1, 2)));
  const Mat9 scaled_sub = scaled.triplet_submatrix(make_triplet(0, 1, 2));
  CHECK(triplet_consistency_score(scaled_sub, cfg) <=
        1e-8 * scaled_sub.norm());

  NViewFundamental corrupt(3);
  corrupt.set_block(0, 1, testutil::random_rank2(rng));
  corrupt.set_block(0, 2, Mat3(F.block(0, 2) / F.block(0, 2).norm()));
  corrupt.set_block(1, 2, Mat3(F.block(1, 2) / F.block(1, 2).norm()));
  const Mat9 corrupt_sub = corrupt.triplet_submatrix(make_triplet(0, 1, 2));
  CHECK(triplet_consistency_score(corrupt_sub, cfg) >
        0.1 * corrupt_sub.norm());
}

TEST_SUITE_END();

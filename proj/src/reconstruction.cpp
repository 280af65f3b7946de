#include "mvfund/reconstruction.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>

#include "mvfund/parallel.hpp"

namespace mvfund {

NViewFundamental NormalizationSet::apply(const NViewFundamental& F) const {
  NViewFundamental out(F.views());
  std::vector<Mat3> N_inv(N.size());
  for (size_t i = 0; i < N.size(); ++i) N_inv[i] = N[i].inverse();
  for (const auto& [i, j] : F.known_pairs())
    out.set_block(i, j, N_inv[i].transpose() * F.block(i, j) * N_inv[j]);
  return out;
}

NViewFundamental NormalizationSet::remove(const NViewFundamental& F) const {
  NViewFundamental out(F.views());
  for (const auto& [i, j] : F.known_pairs())
    out.set_block(i, j, denormalize_block(i, j, F.block(i, j)));
  return out;
}

std::pair<NViewFundamental, NormalizationSet> normalize_blocks(
    const NViewFundamental& measured, const std::vector<Track>& tracks,
    NormalizationMode mode) {
  const int n = measured.views();
  std::vector<std::vector<Vec2>> clouds(n);
  for (const Track& track : tracks)
    for (const Observation& o : track.obs) clouds[o.view].push_back(o.xy);

  NormalizationSet set;
  set.N.resize(n);
  for (int i = 0; i < n; ++i) {
    if (clouds[i].size() < 2)
      throw DegenerateCloud("view " + std::to_string(i) +
                            " has too few observations to normalize");
    set.N[i] = hartley_normalization(clouds[i], mode);
  }
  return {set.apply(measured), std::move(set)};
}

Alignment align_homography(const ProjectiveCamera& src_a,
                           const ProjectiveCamera& src_b,
                           const ProjectiveCamera& dst_a,
                           const ProjectiveCamera& dst_b) {
  // Unknowns: vec(H) row-major (16) then mu_a, mu_b.
  Eigen::Matrix<double, 24, 18> A = Eigen::Matrix<double, 24, 18>::Zero();
  const auto fill = [&A](int block, const Mat34& S, const Mat34& D, int mu_col) {
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 4; ++q) {
        const int row = 12 * block + 4 * p + q;
        for (int r = 0; r < 4; ++r) A(row, 4 * r + q) = S(p, r);
        A(row, mu_col) = -D(p, q);
      }
  };
  fill(0, src_a.P, dst_a.P, 16);
  fill(1, src_b.P, dst_b.P, 17);

  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0) || s(16) / s(0) < 1e-10)
    throw AlignmentDegenerate("camera pair alignment is not unique");

  Eigen::VectorXd v = svd.matrixV().col(17);
  int idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;

  Alignment out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.H(r, c) = v(4 * r + c);
  out.mu_a = v(16);
  out.mu_b = v(17);
  out.residual = s(17) / s(0);
  return out;
}

MergeResult merge_cameras(
    const TripletCover& cover,
    const std::vector<std::array<CameraParams, 3>>& per_triplet_cams) {
  const int m = static_cast<int>(cover.triplets.size());
  if (m == 0) throw std::invalid_argument("empty triplet cover");
  if (static_cast<int>(per_triplet_cams.size()) != m)
    throw std::invalid_argument("camera count does not match the cover");

  int n_views = 0;
  for (const Triplet& t : cover.triplets)
    n_views = std::max(n_views, *std::max_element(t.begin(), t.end()) + 1);

  std::vector<std::vector<int>> neighbors(m);
  for (const auto& [a, b] : cover.adjacency.empty()
                                ? triplet_adjacency(cover.triplets)
                                : cover.adjacency) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }

  MergeResult result;
  result.cameras.assign(n_views, ProjectiveCamera());
  std::vector<bool> placed(n_views, false);

  // Anchor the frame at the most stable triplet.
  int root = 0;
  if (!cover.s.empty())
    root = static_cast<int>(std::distance(
        cover.s.begin(), std::max_element(cover.s.begin(), cover.s.end())));
  result.root_triplet = root;

  const auto place = [&](int view, const ProjectiveCamera& cam) {
    if (placed[view]) {
      const Mat34 a = cam.P / cam.P.norm();
      const Mat34 b = result.cameras[view].P / result.cameras[view].P.norm();
      result.placement_discrepancies.push_back(
          std::min((a - b).norm(), (a + b).norm()));
      return;  // first placement wins
    }
    result.cameras[view] = cam;
    placed[view] = true;
  };

  std::vector<bool> visited(m, false);
  std::deque<int> queue;
  queue.push_back(root);
  visited[root] = true;
  for (int a = 0; a < 3; ++a)
    place(cover.triplets[root][a], per_triplet_cams[root][a].camera());

  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int next : neighbors[cur]) {
      if (visited[next]) continue;
      visited[next] = true;

      const Triplet& t = cover.triplets[next];
      std::vector<int> shared;
      for (int a = 0; a < 3; ++a)
        if (placed[t[a]]) shared.push_back(a);
      if (shared.size() < 2)
        throw UnreachedTriplet("triplet reached before its shared pair");

      const Alignment align = align_homography(
          per_triplet_cams[next][shared[0]].camera(),
          per_triplet_cams[next][shared[1]].camera(),
          result.cameras[t[shared[0]]], result.cameras[t[shared[1]]]);
      for (int a = 0; a < 3; ++a)
        place(t[a],
              ProjectiveCamera(per_triplet_cams[next][a].matrix() * align.H));
      queue.push_back(next);
    }
  }

  if (std::count(visited.begin(), visited.end(), true) != m)
    throw UnreachedTriplet("triplet cover graph is disconnected");
  return result;
}

std::vector<TrackPoint> triangulate_tracks(
    const std::vector<ProjectiveCamera>& cams,
    const std::vector<Track>& tracks) {
  std::vector<TrackPoint> points(tracks.size());
  parallel_for(tracks.size(), [&](size_t idx) {
    const Track& track = tracks[idx];
    std::vector<ProjectiveCamera> view_cams;
    std::vector<Vec2> obs;
    for (const Observation& o : track.obs) {
      if (o.view < 0 || o.view >= static_cast<int>(cams.size())) continue;
      view_cams.push_back(cams[o.view]);
      obs.push_back(o.xy);
    }
    if (view_cams.size() < 2) return;
    try {
      points[idx].X = triangulate_point(view_cams, obs);
      points[idx].valid = true;
    } catch (const DegenerateRays&) {
      points[idx].valid = false;
    }
  });
  return points;
}

ReprojectionStats mean_reprojection_error(const GlobalReconstruction& recon,
                                          const std::vector<Track>& tracks) {
  ReprojectionStats stats;
  double sum = 0.0;
  for (size_t idx = 0; idx < tracks.size(); ++idx) {
    if (idx >= recon.points.size() || !recon.points[idx].valid) {
      ++stats.invalid_tracks;
      continue;
    }
    for (const Observation& o : tracks[idx].obs) {
      const Vec3 proj = recon.cameras[o.view].project_h(recon.points[idx].X);
      if (proj.z() == 0.0) continue;
      const Vec2 px(proj.x() / proj.z(), proj.y() / proj.z());
      sum += (px - o.xy).norm();
      ++stats.observations;
    }
  }
  stats.mean_px = stats.observations > 0 ? sum / stats.observations : 0.0;
  return stats;
}

}  // namespace mvfund

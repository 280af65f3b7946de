#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mvfund/geometry.hpp"
#include "mvfund/graph.hpp"
#include "mvfund/nview.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

/// Per-view conditioning transforms N_i applied to the measured blocks.
struct NormalizationSet {
  std::vector<Mat3> N;

  /// F_ij -> N_i^{-T} F_ij N_j^{-1} on every known block.
  NViewFundamental apply(const NViewFundamental& F) const;

  /// F_ij -> N_i^T F_ij N_j, the inverse map.
  NViewFundamental remove(const NViewFundamental& F) const;

  Mat3 denormalize_block(int i, int j, const Mat3& F_ij) const {
    return N[i].transpose() * F_ij * N[j];
  }
};

/// Builds N_i from the per-view observation clouds and returns the
/// transformed matrix together with the transforms.
std::pair<NViewFundamental, NormalizationSet> normalize_blocks(
    const NViewFundamental& measured, const std::vector<Track>& tracks,
    NormalizationMode mode = NormalizationMode::kAuto);

struct Alignment {
  Mat4 H = Mat4::Identity();
  double mu_a = 1.0;
  double mu_b = 1.0;
  double residual = 0.0;  // smallest singular value over largest
};

/// Homography between two camera pairs sharing a fundamental matrix: the
/// homogeneous least-squares solution of src_a H = mu_a dst_a,
/// src_b H = mu_b dst_b. Throws AlignmentDegenerate when H is not unique.
Alignment align_homography(const ProjectiveCamera& src_a,
                           const ProjectiveCamera& src_b,
                           const ProjectiveCamera& dst_a,
                           const ProjectiveCamera& dst_b);

struct MergeResult {
  std::vector<ProjectiveCamera> cameras;
  /// Relative mismatch logged whenever a view is placed a second time.
  std::vector<double> placement_discrepancies;
  int root_triplet = 0;
};

/// Registers per-triplet cameras into one projective frame by BFS over the
/// shared-pair adjacency, anchored at the most stable triplet. First
/// placement wins. Throws UnreachedTriplet when the cover is disconnected.
MergeResult merge_cameras(
    const TripletCover& cover,
    const std::vector<std::array<CameraParams, 3>>& per_triplet_cams);

struct TrackPoint {
  Vec4 X = Vec4::Zero();
  bool valid = false;
};

/// Linear triangulation of every track; tracks that fail (too few views,
/// degenerate rays) are marked invalid rather than fatal.
std::vector<TrackPoint> triangulate_tracks(
    const std::vector<ProjectiveCamera>& cams,
    const std::vector<Track>& tracks);

struct GlobalReconstruction {
  std::vector<ProjectiveCamera> cameras;
  std::vector<TrackPoint> points;
  std::vector<double> residuals;  // per observation, pixels
};

struct ReprojectionStats {
  double mean_px = 0.0;
  int observations = 0;
  int invalid_tracks = 0;
};

/// Mean Euclidean distance between measured pixels and reprojections;
/// invalid tracks are excluded and counted. Empty input yields mean 0.
ReprojectionStats mean_reprojection_error(const GlobalReconstruction& recon,
                                          const std::vector<Track>& tracks);

}  // namespace mvfund

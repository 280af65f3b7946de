#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvfund/admm.hpp"
#include "mvfund/graph.hpp"
#include "mvfund/nview.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

enum class Layout { kRing, kSphere, kLine };

Layout layout_from_string(const std::string& name);
std::string layout_name(Layout layout);

struct SceneSpec {
  int n_cameras = 10;
  int n_points = 15000;
  Layout layout = Layout::kRing;
  double focal_min = 800.0;
  double focal_max = 1200.0;
  double noise_sigma = 0.0;  // pixels
  uint64_t seed = 0;
  double width = 1024.0;
  double height = 768.0;
};

struct SceneBundle {
  std::vector<CameraParams> cams;
  std::vector<ProjectiveCamera> P;
  std::vector<Vec3> points;
  std::vector<Track> tracks;  // noisy observations, positive depth only
  std::vector<ImageMeta> metas;

  /// Noise-free projection of point `idx` into `view`.
  Vec2 clean_projection(size_t idx, int view) const {
    return P[view].project(Vec4(points[idx].x(), points[idx].y(),
                                points[idx].z(), 1.0));
  }
};

/// Deterministic scene: cameras on the requested layout facing the cloud
/// centroid, points projected and perturbed per coordinate.
SceneBundle generate_scene(const SceneSpec& spec);

/// Eight-point estimates for the requested pairs; edge weights carry the
/// correspondence counts. Throws InsufficientMatches below 8 shared
/// observations.
ViewingGraph estimate_pairwise(const SceneBundle& bundle,
                               const std::vector<std::pair<int, int>>& pairs);

std::vector<std::pair<int, int>> all_pairs(int n);

/// Replaces one measured block with a random rank-2 unit-norm matrix.
void corrupt_block(ViewingGraph& G, int i, int j, uint64_t seed);

struct ConsistencyRow {
  double sigma = 0.0;
  double epipole_consistency = 0.0;      // mean |S_ijk + S_jki + S_kij|, solved
  double frobenius_error = 0.0;          // vs scale-aligned ground truth
  double gt_epipolar_distance = 0.0;     // clean matches under solved blocks
  double raw_epipole_consistency = 0.0;  // same sum on the measured blocks
  double mean_term = 0.0;                // mean |S_ijk| over single terms
};

/// The synthetic consistency sweep: per noise level, estimate 15 random
/// triplets, run the solver, and score epipole consistency, block recovery,
/// and epipolar distance of clean matches.
std::vector<ConsistencyRow> consistency_experiment(
    const SceneSpec& spec, const std::vector<double>& sigma_list,
    int n_triplets = 15, const AdmmConfig& cfg = {});

}  // namespace mvfund

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mvfund/errors.hpp"
#include "mvfund/graph.hpp"
#include "mvfund/reconstruction.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

struct ParseError : Error {
  using Error::Error;
};

/// Line-oriented problem carrier:
///   MVFUND 1
///   N <views>
///   V <view> <width> <height> <cx> <cy>
///   F <i> <j> <m00> .. <m22> <weight>
///   T <point_id> <view_id> <x> <y>
struct ProblemFile {
  int n = 0;
  std::vector<ImageMeta> metas;
  std::map<std::pair<int, int>, ViewingGraph::EdgeData> blocks;
  std::vector<long> track_ids;  // aligned with tracks, first-appearance order
  std::vector<Track> tracks;

  ViewingGraph graph() const;
};

ProblemFile read_problem(const std::string& path);
ProblemFile parse_problem(const std::string& text);
std::string serialize_problem(const ProblemFile& problem);
void write_problem(const std::string& path, const ProblemFile& problem);

/// Reconstruction output: camera lines, homogeneous point lines, then a
/// fixed-order summary block.
struct ReconstructionFile {
  int n = 0;
  std::vector<ProjectiveCamera> cameras;
  std::vector<long> point_ids;
  std::vector<Vec4> points;
  double mean_reprojection_px = 0.0;
  int observations = 0;
  int invalid_tracks = 0;
  int cover_size = 0;
  int admm_iterations = 0;
  double sigma76_mean = 0.0;
  double final_relative_residual = 0.0;
};

std::string serialize_reconstruction(const ReconstructionFile& recon);
void write_reconstruction(const std::string& path,
                          const ReconstructionFile& recon);
ReconstructionFile read_reconstruction(const std::string& path);

/// Ground-truth sidecar written next to synthesized problems.
struct GroundTruthFile {
  std::vector<CameraParams> cams;
  std::vector<Vec3> points;
};

std::string serialize_ground_truth(const GroundTruthFile& gt);
void write_ground_truth(const std::string& path, const GroundTruthFile& gt);
GroundTruthFile read_ground_truth(const std::string& path);

/// Shortest text keeping the double bit-exact ("%.17g").
std::string format_double(double value);

}  // namespace mvfund

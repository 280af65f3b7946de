#pragma once

#include <mvfund/geometry.hpp>
#include <mvfund/nview.hpp>
#include <mvfund/rng.hpp>
#include <mvfund/types.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

using namespace mvfund;

inline Mat3 random_mat3(Rng& rng) {
  Mat3 M;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) M(r, c) = rng.normal();
  return M;
}

inline Vec3 random_vec3(Rng& rng) {
  return Vec3(rng.normal(), rng.normal(), rng.normal());
}

/// Well-conditioned random camera parameters.
inline std::vector<CameraParams> random_cameras(int n, Rng& rng) {
  std::vector<CameraParams> cams(n);
  for (int i = 0; i < n; ++i) {
    cams[i].V = random_mat3(rng) + 3.0 * Mat3::Identity();
    cams[i].t = random_vec3(rng);
  }
  return cams;
}

/// Cameras with exactly collinear centers.
inline std::vector<CameraParams> collinear_cameras(int n, Rng& rng) {
  std::vector<CameraParams> cams(n);
  const Vec3 origin = random_vec3(rng);
  const Vec3 dir = random_vec3(rng).normalized();
  for (int i = 0; i < n; ++i) {
    cams[i].V = random_mat3(rng) + 3.0 * Mat3::Identity();
    cams[i].t = origin + (1.0 + i) * dir;
  }
  return cams;
}

inline double correlation(const Mat3& A, const Mat3& B) {
  return std::abs((A.array() * B.array()).sum()) / (A.norm() * B.norm());
}

/// Worst per-block normalized correlation between two n-view matrices.
inline double worst_block_correlation(const NViewFundamental& A,
                                      const NViewFundamental& B) {
  double worst = 1.0;
  for (int i = 0; i < A.views(); ++i)
    for (int j = i + 1; j < A.views(); ++j)
      worst = std::min(worst, correlation(A.block(i, j), B.block(i, j)));
  return worst;
}

inline Mat3 random_rank2(Rng& rng) {
  Mat3 F = svp(random_mat3(rng), 2);
  return F / F.norm();
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

/// Runs the CLI binary, capturing combined stdout/stderr.
inline CommandResult run_cli(const std::string& args) {
  const std::string out_path =
      std::string("/tmp/mvfund_cli_") + std::to_string(::getpid()) + ".out";
  const std::string cmd =
      std::string(MVFUND_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::stringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  std::remove(out_path.c_str());
  return result;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testutil

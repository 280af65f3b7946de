#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvfund/admm.hpp"
#include "mvfund/graph.hpp"
#include "mvfund/io.hpp"
#include "mvfund/reconstruction.hpp"
#include "mvfund/synth.hpp"

namespace mvfund {

namespace exit_code {
constexpr int kOk = 0;
constexpr int kFailure = 1;        // other numerical failure
constexpr int kParse = 2;
constexpr int kDisconnected = 3;
constexpr int kCoverInfeasible = 4;
constexpr int kNonFinite = 5;
constexpr int kIncomplete = 6;
constexpr int kUsage = 64;
}  // namespace exit_code

struct PipelineOptions {
  AdmmConfig admm;
  CoverParams cover;
  NormalizationMode normalization = NormalizationMode::kAuto;
  bool paper_parity = false;

  /// Parameters pinned to the published values: alpha 0.001, 1000
  /// iterations with no early stop, 5 trees, delta1 0.03, the delta2 rule.
  PipelineOptions with_parity() const;
};

struct SolveArtifacts {
  TripletCover cover;
  AdmmDiagnostics diagnostics;
  NViewFundamental solved;  // denormalized
  MergeResult merge;
  GlobalReconstruction recon;
  ReprojectionStats stats;

  SolveArtifacts() : solved(0) {}
};

/// The full recovery pipeline on an in-memory problem. Throws the module
/// errors (DisconnectedGraph, CoverInfeasible, NonFinite, ...).
SolveArtifacts run_solve_pipeline(const ProblemFile& problem,
                                  const PipelineOptions& options);

/// Text rendering of a consistency report, one field per line with a final
/// verdict line.
std::string render_consistency_report(const ConsistencyReport& report);

// CLI entry points; each returns a process exit code and reports on the
// given streams.
int cmd_solve(const std::string& input_path, const std::string& output_path,
              const PipelineOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_check(const std::string& input_path, std::ostream& out,
              std::ostream& err);
int cmd_synth(const SceneSpec& spec, const std::string& output_path,
              std::ostream& err);
int cmd_simulate(const SceneSpec& spec, const std::vector<double>& sigmas,
                 int n_seeds, const std::string& output_path,
                 std::ostream& out, std::ostream& err);

}  // namespace mvfund

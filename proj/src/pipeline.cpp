#include "mvfund/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace mvfund {

PipelineOptions PipelineOptions::with_parity() const {
  PipelineOptions o = *this;
  o.admm.alpha = 0.001;
  o.admm.iterations = 1000;
  o.admm.early_stop_residual = 0.0;
  o.cover.n_trees = 5;
  o.cover.delta1 = 0.03;
  o.cover.delta2_high = 1.2;
  o.cover.alpha = 0.001;
  o.paper_parity = true;
  return o;
}

SolveArtifacts run_solve_pipeline(const ProblemFile& problem,
                                  const PipelineOptions& options_in) {
  const PipelineOptions options =
      options_in.paper_parity ? options_in.with_parity() : options_in;

  const ViewingGraph G = problem.graph();
  if (!G.connected()) throw DisconnectedGraph("viewing graph is disconnected");

  NViewFundamental measured(problem.n);
  for (const auto& [key, data] : problem.blocks)
    measured.set_block(key.first, key.second, data.block);

  // Conditioning happens in normalized image coordinates when tracks are
  // available; the collinearity score stays in pixel units.
  NViewFundamental working(problem.n);
  NormalizationSet norm;
  const bool normalized = !problem.tracks.empty();
  if (normalized) {
    std::tie(working, norm) =
        normalize_blocks(measured, problem.tracks, options.normalization);
  } else {
    working = measured;
  }

  const AdmmConfig score_cfg{options.cover.alpha,
                             options.cover.score_iterations, 1e-14};
  const ConsistencyScorer scorer = [&working, &score_cfg](const Triplet& t) {
    return triplet_consistency_score(working.triplet_submatrix(t), score_cfg);
  };

  SolveArtifacts artifacts;
  artifacts.cover = build_triplet_cover(G, options.cover, scorer);

  auto [solved_n, diagnostics] =
      solve(working, artifacts.cover.triplets, options.admm);
  artifacts.diagnostics = std::move(diagnostics);
  artifacts.solved = normalized ? norm.remove(solved_n) : solved_n;

  // Extraction, merging, and triangulation all run in the conditioned
  // coordinates; only the final cameras move back to pixel units (per view,
  // P = N^{-1} P_n).
  std::vector<std::array<CameraParams, 3>> per_triplet;
  per_triplet.reserve(artifacts.cover.triplets.size());
  for (const Triplet& t : artifacts.cover.triplets) {
    NViewFundamental sub(3);
    sub.set_block(0, 1, solved_n.block(t[0], t[1]));
    sub.set_block(0, 2, solved_n.block(t[0], t[2]));
    sub.set_block(1, 2, solved_n.block(t[1], t[2]));
    const auto cams = extract_cameras(sub);
    per_triplet.push_back({cams[0], cams[1], cams[2]});
  }

  artifacts.merge = merge_cameras(artifacts.cover, per_triplet);

  if (!problem.tracks.empty()) {
    std::vector<Track> conditioned = problem.tracks;
    if (normalized) {
      for (Track& track : conditioned)
        for (Observation& o : track.obs) {
          const Vec3 q = norm.N[o.view] * homogeneous(o.xy);
          o.xy = Vec2(q.x() / q.z(), q.y() / q.z());
        }
    }
    artifacts.recon.points =
        triangulate_tracks(artifacts.merge.cameras, conditioned);
  }

  if (normalized) {
    std::vector<Mat3> N_inv(norm.N.size());
    for (size_t v = 0; v < norm.N.size(); ++v) N_inv[v] = norm.N[v].inverse();
    for (int v = 0; v < problem.n; ++v) {
      Mat34 P = N_inv[v] * artifacts.merge.cameras[v].P;
      artifacts.merge.cameras[v] = ProjectiveCamera(Mat34(P / P.norm()));
    }
  }
  artifacts.recon.cameras = artifacts.merge.cameras;
  if (!problem.tracks.empty())
    artifacts.stats = mean_reprojection_error(artifacts.recon, problem.tracks);
  return artifacts;
}

std::string render_consistency_report(const ConsistencyReport& report) {
  std::ostringstream out;
  out << "rank(F) = " << report.rank_of_F << "\n";
  out << "sigma7/sigma6 = " << format_double(report.sigma76_ratio) << "\n";
  out << "eigenvalue signature = " << report.eig_signature.first << "+/"
      << report.eig_signature.second << "-\n";
  const int n = static_cast<int>(report.block_row_ranks.size());
  int rows_ok = 0;
  for (int rank : report.block_row_ranks) rows_ok += rank == 3;
  out << "block rows with rank 3 = " << rows_ok << "/" << n << "\n";
  out << "blocks rank 2 = " << (report.block_ranks_ok ? "yes" : "no") << "\n";
  out << "diagonal zero = " << (report.diagonal_ok ? "yes" : "no") << "\n";

  if (report.consistent) {
    out << "verdict: CONSISTENT\n";
  } else {
    std::string reason;
    if (report.rank_of_F != 6)
      reason = "rank(F)=" + std::to_string(report.rank_of_F) + ", expected 6";
    else if (report.eig_signature != std::make_pair(3, 3))
      reason = "eigenvalue signature " +
               std::to_string(report.eig_signature.first) + "+/" +
               std::to_string(report.eig_signature.second) + "-, expected 3+/3-";
    else if (rows_ok != n)
      reason = "some block row has rank < 3";
    else if (!report.block_ranks_ok)
      reason = "some block does not have rank 2";
    else
      reason = "nonzero diagonal block";
    out << "verdict: INCONSISTENT (" << reason << ")\n";
  }
  return out.str();
}

namespace {

void write_solve_sidecar(const std::string& path, const SolveArtifacts& a) {
  nlohmann::json j;
  j["cover"]["size"] = a.cover.triplets.size();
  j["cover"]["triplets"] = a.cover.triplets;
  j["cover"]["l"] = a.cover.l;
  j["cover"]["c"] = a.cover.c;
  j["cover"]["s"] = a.cover.s;
  j["admm"]["iterations"] = a.diagnostics.iterations_run;
  j["admm"]["sigma76_mean"] = a.diagnostics.final_sigma76_mean;
  j["admm"]["final_relative_residual"] = a.diagnostics.final_relative_residual;
  j["admm"]["residual_curve"] = a.diagnostics.primal_residuals;
  j["admm"]["warnings"] = a.diagnostics.warnings;
  j["merge"]["root_triplet"] = a.merge.root_triplet;
  j["merge"]["placement_discrepancies"] = a.merge.placement_discrepancies;
  j["reprojection"]["mean_px"] = a.stats.mean_px;
  j["reprojection"]["observations"] = a.stats.observations;
  j["reprojection"]["invalid_tracks"] = a.stats.invalid_tracks;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << "\n";
}

}  // namespace

int cmd_solve(const std::string& input_path, const std::string& output_path,
              const PipelineOptions& options, std::ostream& out,
              std::ostream& err) {
  ProblemFile problem;
  try {
    problem = read_problem(input_path);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return exit_code::kParse;
  }

  SolveArtifacts artifacts;
  try {
    artifacts = run_solve_pipeline(problem, options);
  } catch (const DisconnectedGraph& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kDisconnected;
  } catch (const CoverInfeasible& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kCoverInfeasible;
  } catch (const UncoverableView& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kCoverInfeasible;
  } catch (const NonFinite& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kNonFinite;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kFailure;
  }

  ReconstructionFile recon;
  recon.n = problem.n;
  recon.cameras = artifacts.recon.cameras;
  for (size_t idx = 0; idx < artifacts.recon.points.size(); ++idx) {
    if (!artifacts.recon.points[idx].valid) continue;
    recon.point_ids.push_back(problem.track_ids[idx]);
    recon.points.push_back(artifacts.recon.points[idx].X);
  }
  recon.mean_reprojection_px = artifacts.stats.mean_px;
  recon.observations = artifacts.stats.observations;
  recon.invalid_tracks = artifacts.stats.invalid_tracks;
  recon.cover_size = static_cast<int>(artifacts.cover.triplets.size());
  recon.admm_iterations = artifacts.diagnostics.iterations_run;
  recon.sigma76_mean = artifacts.diagnostics.final_sigma76_mean;
  recon.final_relative_residual = artifacts.diagnostics.final_relative_residual;

  write_reconstruction(output_path, recon);
  write_solve_sidecar(output_path + ".diag.json", artifacts);

  out << "views " << problem.n << " cover " << recon.cover_size
      << " mean_reprojection_px " << format_double(recon.mean_reprojection_px)
      << "\n";
  return exit_code::kOk;
}

int cmd_check(const std::string& input_path, std::ostream& out,
              std::ostream& err) {
  ProblemFile problem;
  try {
    problem = read_problem(input_path);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return exit_code::kParse;
  }

  const int expected = problem.n * (problem.n - 1) / 2;
  if (static_cast<int>(problem.blocks.size()) != expected) {
    err << "error: consistency check needs all " << expected
        << " blocks, found " << problem.blocks.size() << "\n";
    return exit_code::kIncomplete;
  }

  NViewFundamental F(problem.n);
  for (const auto& [key, data] : problem.blocks)
    F.set_block(key.first, key.second, data.block);
  const ConsistencyReport report = check_consistency(F);
  out << render_consistency_report(report);
  return exit_code::kOk;
}

int cmd_synth(const SceneSpec& spec, const std::string& output_path,
              std::ostream& err) {
  try {
    const SceneBundle bundle = generate_scene(spec);
    const ViewingGraph G = estimate_pairwise(bundle, all_pairs(spec.n_cameras));

    ProblemFile problem;
    problem.n = spec.n_cameras;
    problem.metas = bundle.metas;
    problem.blocks = G.edges;
    for (size_t idx = 0; idx < bundle.tracks.size(); ++idx) {
      if (bundle.tracks[idx].obs.size() < 2) continue;
      problem.track_ids.push_back(static_cast<long>(idx));
      problem.tracks.push_back(bundle.tracks[idx]);
    }
    write_problem(output_path, problem);

    GroundTruthFile gt;
    gt.cams = bundle.cams;
    gt.points = bundle.points;
    write_ground_truth(output_path + ".gt", gt);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kFailure;
  }
  return exit_code::kOk;
}

int cmd_simulate(const SceneSpec& spec, const std::vector<double>& sigmas,
                 int n_seeds, const std::string& output_path,
                 std::ostream& out, std::ostream& err) {
  if (sigmas.empty() || n_seeds < 1) {
    err << "usage error: need a noise list and at least one seed\n";
    return exit_code::kUsage;
  }

  std::vector<ConsistencyRow> mean_rows(sigmas.size());
  try {
    for (int s = 0; s < n_seeds; ++s) {
      SceneSpec seeded = spec;
      seeded.seed = spec.seed + static_cast<uint64_t>(s);
      const auto rows = consistency_experiment(seeded, sigmas);
      for (size_t idx = 0; idx < rows.size(); ++idx) {
        mean_rows[idx].sigma = rows[idx].sigma;
        mean_rows[idx].epipole_consistency += rows[idx].epipole_consistency;
        mean_rows[idx].frobenius_error += rows[idx].frobenius_error;
        mean_rows[idx].gt_epipolar_distance += rows[idx].gt_epipolar_distance;
        mean_rows[idx].raw_epipole_consistency +=
            rows[idx].raw_epipole_consistency;
        mean_rows[idx].mean_term += rows[idx].mean_term;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kFailure;
  }

  std::ostringstream csv;
  csv << "sigma,epipole_consistency,frobenius_error,gt_epipolar_distance\n";
  for (ConsistencyRow& row : mean_rows) {
    row.epipole_consistency /= n_seeds;
    row.frobenius_error /= n_seeds;
    row.gt_epipolar_distance /= n_seeds;
    row.raw_epipole_consistency /= n_seeds;
    row.mean_term /= n_seeds;
    csv << format_double(row.sigma) << "," << format_double(row.epipole_consistency)
        << "," << format_double(row.frobenius_error) << ","
        << format_double(row.gt_epipolar_distance) << "\n";
  }

  if (output_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write '" << output_path << "'\n";
      return exit_code::kFailure;
    }
    file << csv.str();

    nlohmann::json j;
    for (const ConsistencyRow& row : mean_rows) {
      nlohmann::json r;
      r["sigma"] = row.sigma;
      r["epipole_consistency"] = row.epipole_consistency;
      r["raw_epipole_consistency"] = row.raw_epipole_consistency;
      r["mean_single_term"] = row.mean_term;
      r["frobenius_error"] = row.frobenius_error;
      r["gt_epipolar_distance"] = row.gt_epipolar_distance;
      j["rows"].push_back(r);
    }
    j["seeds"] = n_seeds;
    std::ofstream diag(output_path + ".diag.json",
                       std::ios::binary | std::ios::trunc);
    diag << j.dump(2) << "\n";
  }
  return exit_code::kOk;
}

}  // namespace mvfund

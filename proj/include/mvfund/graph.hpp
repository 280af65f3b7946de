#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mvfund/errors.hpp"
#include "mvfund/types.hpp"

namespace mvfund {

/// Weighted viewing graph; one edge per measured pairwise fundamental
/// matrix, keyed (i, j) with i < j.
struct ViewingGraph {
  struct EdgeData {
    double weight = 0.0;  // inlier count
    Mat3 block = Mat3::Zero();
  };

  int n = 0;
  std::map<std::pair<int, int>, EdgeData> edges;
  std::vector<ImageMeta> metas;  // optional; empty means normalized units

  bool has_edge(int i, int j) const {
    return edges.count(ordered(i, j)) > 0;
  }
  double weight(int i, int j) const { return edges.at(ordered(i, j)).weight; }

  /// Measured block oriented as F_ij (transpose of the stored block when
  /// i > j).
  Mat3 block(int i, int j) const {
    const auto& e = edges.at(ordered(i, j));
    return i < j ? e.block : Mat3(e.block.transpose());
  }

  Mat9 triplet_submatrix(const Triplet& t) const;
  bool connected() const;

  static std::pair<int, int> ordered(int i, int j) {
    return i < j ? std::pair{i, j} : std::pair{j, i};
  }
};

/// Selected 3-cliques with their adjacency (triplets sharing two views) and
/// per-triplet scores.
struct TripletCover {
  std::vector<Triplet> triplets;
  std::vector<std::pair<int, int>> adjacency;
  std::vector<double> l;  // non-collinearity
  std::vector<double> c;  // single-triplet consistency residual
  std::vector<double> s;  // stability l^delta2 / c
};

struct CoverParams {
  int n_trees = 5;
  double delta1 = 0.03;       // collinearity threshold
  double delta2_high = 1.2;   // used when mean l <= 0.5; else delta2 = 0
  int score_iterations = 50;  // budget of the single-triplet scorer
  double alpha = 0.001;
};

struct CoverReport {
  bool views_covered = false;
  std::vector<int> missing_views;
  bool tau_connected = false;
  std::vector<std::vector<int>> components;  // triplet indices per component
  bool blocks_present = false;

  bool ok() const { return views_covered && tau_connected && blocks_present; }
};

/// Union of up to n_trees edge-disjoint maximum-weight spanning trees,
/// computed greedily; stops early once the residual graph disconnects.
/// Throws DisconnectedGraph when G itself is not connected.
std::vector<std::pair<int, int>> edge_disjoint_max_trees(
    const ViewingGraph& G, int n_trees);

/// All 3-cliques of the edge subset, augmented from the full edge set when
/// some view belongs to no clique. Throws UncoverableView when a view is in
/// no 3-clique of the whole graph.
std::vector<Triplet> enumerate_triplets(
    const std::vector<std::pair<int, int>>& edge_subset,
    const ViewingGraph& G);

/// Mean over the three images of (epipole distance) / (mean distance of the
/// epipoles to the image center). Near zero for collinear camera centers.
/// An epipole at infinity contributes the capped ratio 2.
double collinearity_measure(const Mat3& F_ij, const Mat3& F_ik,
                            const Mat3& F_jk,
                            const std::vector<ImageMeta>& metas = {});

/// Scorer callback: consistency residual c_k of one candidate triplet.
using ConsistencyScorer = std::function<double(const Triplet&)>;

/// Tree extraction, triplet enumeration, collinearity pruning (l < delta1),
/// consistency scoring, then greedy removal by ascending stability score
/// while the cover stays connected and complete.
TripletCover build_triplet_cover(const ViewingGraph& G,
                                 const CoverParams& params,
                                 const ConsistencyScorer& scorer);

CoverReport validate_cover(const TripletCover& cover, const ViewingGraph& G);

/// Shared-two-view adjacency pairs (k, l), k < l.
std::vector<std::pair<int, int>> triplet_adjacency(
    const std::vector<Triplet>& triplets);

}  // namespace mvfund

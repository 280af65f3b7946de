#include "mvfund/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mvfund/geometry.hpp"

namespace mvfund {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

bool edges_span(int n, const std::vector<std::pair<int, int>>& edges) {
  UnionFind uf(n);
  int merges = 0;
  for (const auto& [i, j] : edges) merges += uf.unite(i, j);
  return merges == n - 1;
}

// Dehomogenized epipole ratio for one image; unit-norm homogeneous inputs.
double epipole_ratio(const Vec3& e1, const Vec3& e2, const Vec2& center) {
  if (std::abs(e1.z()) < 1e-12 || std::abs(e2.z()) < 1e-12) return 2.0;
  const Vec2 p1 = e1.head<2>() / e1.z();
  const Vec2 p2 = e2.head<2>() / e2.z();
  const double d12 = (p1 - p2).norm();
  const double dc = 0.5 * ((p1 - center).norm() + (p2 - center).norm());
  if (dc < 1e-12) return d12 < 1e-12 ? 0.0 : 2.0;
  return d12 / dc;
}

}  // namespace

Mat9 ViewingGraph::triplet_submatrix(const Triplet& t) const {
  Mat9 S = Mat9::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) S.block<3, 3>(3 * a, 3 * b) = block(t[a], t[b]);
  return S;
}

bool ViewingGraph::connected() const {
  if (n <= 1) return true;
  std::vector<std::pair<int, int>> e;
  e.reserve(edges.size());
  for (const auto& [key, data] : edges) e.push_back(key);
  return edges_span(n, e);
}

std::vector<std::pair<int, int>> edge_disjoint_max_trees(
    const ViewingGraph& G, int n_trees) {
  if (!G.connected()) throw DisconnectedGraph("viewing graph is disconnected");

  std::vector<std::pair<int, int>> remaining;
  remaining.reserve(G.edges.size());
  for (const auto& [key, data] : G.edges) remaining.push_back(key);

  std::vector<std::pair<int, int>> result;
  for (int pass = 0; pass < n_trees; ++pass) {
    if (!edges_span(G.n, remaining)) break;

    // Kruskal with weight ties broken toward low tree degrees; star-shaped
    // trees would disconnect the residual graph for the following passes.
    UnionFind uf(G.n);
    std::vector<int> degree(G.n, 0);
    std::vector<bool> used(remaining.size(), false);
    for (int picked = 0; picked < G.n - 1; ++picked) {
      int best = -1;
      for (size_t e = 0; e < remaining.size(); ++e) {
        if (used[e]) continue;
        const auto& [i, j] = remaining[e];
        if (uf.find(i) == uf.find(j)) continue;
        if (best < 0) {
          best = static_cast<int>(e);
          continue;
        }
        const auto& [bi, bj] = remaining[best];
        const double w = G.edges.at(remaining[e]).weight;
        const double bw = G.edges.at(remaining[best]).weight;
        const int d = degree[i] + degree[j];
        const int bd = degree[bi] + degree[bj];
        if (w > bw || (w == bw && (d < bd || (d == bd && remaining[e] <
                                                  remaining[best]))))
          best = static_cast<int>(e);
      }
      const auto& [i, j] = remaining[best];
      uf.unite(i, j);
      ++degree[i];
      ++degree[j];
      used[best] = true;
      result.push_back(remaining[best]);
    }

    std::vector<std::pair<int, int>> leftover;
    for (size_t e = 0; e < remaining.size(); ++e)
      if (!used[e]) leftover.push_back(remaining[e]);
    remaining = std::move(leftover);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<Triplet> enumerate_triplets(
    const std::vector<std::pair<int, int>>& edge_subset,
    const ViewingGraph& G) {
  std::set<std::pair<int, int>> active(edge_subset.begin(), edge_subset.end());

  const auto triangles_of = [&](const std::set<std::pair<int, int>>& edges) {
    std::set<Triplet> out;
    for (const auto& [i, j] : edges)
      for (int k = 0; k < G.n; ++k) {
        if (k == i || k == j) continue;
        if (edges.count(ViewingGraph::ordered(i, k)) &&
            edges.count(ViewingGraph::ordered(j, k)))
          out.insert(make_triplet(i, j, k));
      }
    return out;
  };

  std::set<Triplet> triangles = triangles_of(active);
  std::vector<bool> covered(G.n, false);
  for (const Triplet& t : triangles)
    for (int v : t) covered[v] = true;

  for (int v = 0; v < G.n; ++v) {
    if (covered[v]) continue;

    // Incident edges first, best supported first, then edges closing a
    // triangle between two neighbors.
    std::vector<std::pair<int, int>> incident;
    for (const auto& [key, data] : G.edges)
      if (key.first == v || key.second == v) incident.push_back(key);
    std::sort(incident.begin(), incident.end(),
              [&G](const auto& a, const auto& b) {
                const double wa = G.edges.at(a).weight;
                const double wb = G.edges.at(b).weight;
                return wa != wb ? wa > wb : a < b;
              });

    bool formed = false;
    for (const auto& e : incident) {
      active.insert(e);
      const int other = e.first == v ? e.second : e.first;
      for (const auto& f : incident) {
        if (!active.count(f)) continue;
        const int third = f.first == v ? f.second : f.first;
        if (third == other) continue;
        if (active.count(ViewingGraph::ordered(other, third))) {
          formed = true;
          break;
        }
      }
      if (formed) break;
    }
    if (!formed) {
      for (const auto& a : incident) {
        const int p = a.first == v ? a.second : a.first;
        for (const auto& b : incident) {
          const int q = b.first == v ? b.second : b.first;
          if (q <= p) continue;
          const auto closing = ViewingGraph::ordered(p, q);
          if (G.edges.count(closing)) {
            active.insert(a);
            active.insert(b);
            active.insert(closing);
            formed = true;
            break;
          }
        }
        if (formed) break;
      }
    }
    if (!formed)
      throw UncoverableView("view " + std::to_string(v) +
                            " is in no 3-clique of the viewing graph");

    triangles = triangles_of(active);
    for (const Triplet& t : triangles)
      for (int u : t) covered[u] = true;
  }

  return {triangles.begin(), triangles.end()};
}

double collinearity_measure(const Mat3& F_ij, const Mat3& F_ik,
                            const Mat3& F_jk,
                            const std::vector<ImageMeta>& metas) {
  const auto center = [&metas](int local) {
    return metas.size() == 3 ? metas[local].center : Vec2(0.0, 0.0);
  };
  const auto [e_i_from_j, e_j_from_i] = epipoles(F_ij);
  const auto [e_i_from_k, e_k_from_i] = epipoles(F_ik);
  const auto [e_j_from_k, e_k_from_j] = epipoles(F_jk);

  const double r_i = epipole_ratio(e_i_from_j, e_i_from_k, center(0));
  const double r_j = epipole_ratio(e_j_from_i, e_j_from_k, center(1));
  const double r_k = epipole_ratio(e_k_from_i, e_k_from_j, center(2));
  return (r_i + r_j + r_k) / 3.0;
}

std::vector<std::pair<int, int>> triplet_adjacency(
    const std::vector<Triplet>& triplets) {
  std::vector<std::pair<int, int>> adj;
  for (size_t a = 0; a < triplets.size(); ++a)
    for (size_t b = a + 1; b < triplets.size(); ++b) {
      int shared = 0;
      for (int v : triplets[a])
        shared += std::count(triplets[b].begin(), triplets[b].end(), v);
      if (shared == 2) adj.emplace_back(a, b);
    }
  return adj;
}

namespace {

bool cover_valid(const std::vector<Triplet>& triplets, int n_views) {
  if (triplets.empty()) return false;
  std::vector<bool> covered(n_views, false);
  for (const Triplet& t : triplets)
    for (int v : t) covered[v] = true;
  if (!std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }))
    return false;

  const auto adj = triplet_adjacency(triplets);
  UnionFind uf(static_cast<int>(triplets.size()));
  int merges = 0;
  for (const auto& [a, b] : adj) merges += uf.unite(a, b);
  return merges == static_cast<int>(triplets.size()) - 1;
}

}  // namespace

TripletCover build_triplet_cover(const ViewingGraph& G,
                                 const CoverParams& params,
                                 const ConsistencyScorer& scorer) {
  const auto trees = edge_disjoint_max_trees(G, params.n_trees);
  const auto candidates = enumerate_triplets(trees, G);

  std::vector<Triplet> kept;
  std::vector<double> l_kept;
  for (const Triplet& t : candidates) {
    std::vector<ImageMeta> metas;
    if (static_cast<int>(G.metas.size()) == G.n)
      metas = {G.metas[t[0]], G.metas[t[1]], G.metas[t[2]]};
    double l = 0.0;
    try {
      l = collinearity_measure(G.block(t[0], t[1]), G.block(t[0], t[2]),
                               G.block(t[1], t[2]), metas);
    } catch (const RankDeficiencyError&) {
      continue;  // a degenerate block disqualifies its triplets only
    }
    if (l < params.delta1) continue;
    kept.push_back(t);
    l_kept.push_back(l);
  }

  {
    std::vector<bool> covered(G.n, false);
    for (const Triplet& t : kept)
      for (int v : t) covered[v] = true;
    for (int v = 0; v < G.n; ++v)
      if (!covered[v])
        throw CoverInfeasible("collinearity pruning left view " +
                              std::to_string(v) + " uncovered");
  }

  std::vector<double> c_kept(kept.size());
  for (size_t k = 0; k < kept.size(); ++k) c_kept[k] = scorer(kept[k]);

  const double mean_l =
      std::accumulate(l_kept.begin(), l_kept.end(), 0.0) / l_kept.size();
  const double delta2 = mean_l > 0.5 ? 0.0 : params.delta2_high;

  std::vector<double> s_kept(kept.size());
  for (size_t k = 0; k < kept.size(); ++k)
    s_kept[k] = std::pow(l_kept[k], delta2) / c_kept[k];

  // Least stable first; ties by triplet index for determinism.
  std::vector<size_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return s_kept[a] != s_kept[b] ? s_kept[a] < s_kept[b]
                                  : kept[a] < kept[b];
  });

  std::vector<bool> removed(kept.size(), false);
  for (size_t idx : order) {
    removed[idx] = true;
    std::vector<Triplet> rest;
    for (size_t k = 0; k < kept.size(); ++k)
      if (!removed[k]) rest.push_back(kept[k]);
    if (!cover_valid(rest, G.n)) removed[idx] = false;
  }

  TripletCover cover;
  for (size_t k = 0; k < kept.size(); ++k) {
    if (removed[k]) continue;
    cover.triplets.push_back(kept[k]);
    cover.l.push_back(l_kept[k]);
    cover.c.push_back(c_kept[k]);
    cover.s.push_back(s_kept[k]);
  }
  cover.adjacency = triplet_adjacency(cover.triplets);
  return cover;
}

CoverReport validate_cover(const TripletCover& cover, const ViewingGraph& G) {
  CoverReport report;

  std::vector<bool> covered(G.n, false);
  for (const Triplet& t : cover.triplets)
    for (int v : t) covered[v] = true;
  for (int v = 0; v < G.n; ++v)
    if (!covered[v]) report.missing_views.push_back(v);
  report.views_covered = report.missing_views.empty();

  const auto adj = triplet_adjacency(cover.triplets);
  const int m = static_cast<int>(cover.triplets.size());
  UnionFind uf(std::max(m, 1));
  for (const auto& [a, b] : adj) uf.unite(a, b);
  std::map<int, std::vector<int>> comps;
  for (int k = 0; k < m; ++k) comps[uf.find(k)].push_back(k);
  for (auto& [root, members] : comps) report.components.push_back(members);
  report.tau_connected = m > 0 && comps.size() == 1;

  report.blocks_present = true;
  for (const Triplet& t : cover.triplets)
    report.blocks_present = report.blocks_present && G.has_edge(t[0], t[1]) &&
                            G.has_edge(t[0], t[2]) && G.has_edge(t[1], t[2]);
  return report;
}

}  // namespace mvfund

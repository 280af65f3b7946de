#include "mvfund/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvfund/geometry.hpp"
#include "mvfund/rng.hpp"

namespace mvfund {

Layout layout_from_string(const std::string& name) {
  if (name == "ring") return Layout::kRing;
  if (name == "sphere") return Layout::kSphere;
  if (name == "line") return Layout::kLine;
  throw InvalidLayout("unknown layout '" + name + "'");
}

std::string layout_name(Layout layout) {
  switch (layout) {
    case Layout::kRing: return "ring";
    case Layout::kSphere: return "sphere";
    case Layout::kLine: return "line";
  }
  return "ring";
}

namespace {

Mat3 look_at_rotation(const Vec3& center, const Vec3& target) {
  Vec3 z = (target - center).normalized();
  Vec3 up(0.0, 0.0, 1.0);
  if (std::abs(z.dot(up)) > 0.99) up = Vec3(0.0, 1.0, 0.0);
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

std::vector<Vec3> camera_centers(const SceneSpec& spec, Rng& rng) {
  std::vector<Vec3> centers(spec.n_cameras);
  const int n = spec.n_cameras;
  switch (spec.layout) {
    case Layout::kRing:
      for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * M_PI * k / n;
        const double radius = 4.0 * (1.0 + 0.1 * (2.0 * rng.uniform() - 1.0));
        const double z = 0.4 * (2.0 * rng.uniform() - 1.0);
        centers[k] = Vec3(radius * std::cos(angle), radius * std::sin(angle), z);
      }
      break;
    case Layout::kSphere:
      for (int k = 0; k < n; ++k) {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        const double y = 1.0 - 2.0 * (k + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double theta = golden * k + 0.2 * rng.uniform();
        centers[k] =
            4.0 * Vec3(r * std::cos(theta), y, r * std::sin(theta));
      }
      break;
    case Layout::kLine:
      // Exactly collinear centers; spacing jitter keeps them distinct.
      for (int k = 0; k < n; ++k) {
        const double s = n > 1 ? -2.0 + 4.0 * k / (n - 1) : 0.0;
        centers[k] = Vec3(s, -4.0, 0.0);
        rng.uniform();  // keep the draw count layout independent
      }
      break;
  }
  return centers;
}

}  // namespace

SceneBundle generate_scene(const SceneSpec& spec) {
  if (spec.n_cameras < 2)
    throw std::invalid_argument("scene needs at least two cameras");
  if (spec.n_points < 1) throw std::invalid_argument("scene needs points");
  if (spec.noise_sigma < 0.0)
    throw std::invalid_argument("noise sigma must be nonnegative");

  Rng rng(spec.seed);
  SceneBundle bundle;

  bundle.points.resize(spec.n_points);
  Vec3 centroid = Vec3::Zero();
  for (Vec3& p : bundle.points) {
    p = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
             rng.uniform(-1.0, 1.0));
    centroid += p;
  }
  centroid /= spec.n_points;

  const std::vector<Vec3> centers = camera_centers(spec, rng);
  bundle.cams.resize(spec.n_cameras);
  bundle.P.resize(spec.n_cameras);
  bundle.metas.resize(spec.n_cameras);
  for (int k = 0; k < spec.n_cameras; ++k) {
    const double f = rng.uniform(spec.focal_min, spec.focal_max);
    Mat3 K;
    K << f, 0.0, spec.width / 2.0,
        0.0, f, spec.height / 2.0,
        0.0, 0.0, 1.0;
    const Mat3 R = look_at_rotation(centers[k], centroid);
    bundle.cams[k].V = K.inverse().transpose() * R.transpose();
    bundle.cams[k].t = centers[k];
    bundle.P[k] = bundle.cams[k].camera();
    bundle.metas[k] = ImageMeta(k, spec.width, spec.height);
  }

  bundle.tracks.resize(spec.n_points);
  for (int idx = 0; idx < spec.n_points; ++idx) {
    Track& track = bundle.tracks[idx];
    for (int k = 0; k < spec.n_cameras; ++k) {
      const Vec4 Xh(bundle.points[idx].x(), bundle.points[idx].y(),
                    bundle.points[idx].z(), 1.0);
      const Vec3 proj = bundle.P[k].project_h(Xh);
      if (proj.z() <= 0.0) continue;  // behind the camera
      Observation o;
      o.view = k;
      o.xy = Vec2(proj.x() / proj.z(), proj.y() / proj.z());
      o.xy.x() += spec.noise_sigma * rng.normal();
      o.xy.y() += spec.noise_sigma * rng.normal();
      track.obs.push_back(o);
    }
  }
  return bundle;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

ViewingGraph estimate_pairwise(
    const SceneBundle& bundle, const std::vector<std::pair<int, int>>& pairs) {
  ViewingGraph G;
  G.n = static_cast<int>(bundle.cams.size());
  G.metas = bundle.metas;

  for (const auto& [i, j] : pairs) {
    std::vector<Correspondence> corrs;
    for (const Track& track : bundle.tracks) {
      const Observation* a = nullptr;
      const Observation* b = nullptr;
      for (const Observation& o : track.obs) {
        if (o.view == i) a = &o;
        if (o.view == j) b = &o;
      }
      if (a && b) corrs.push_back({i, j, a->xy, b->xy});
    }
    if (corrs.size() < 8)
      throw InsufficientMatches("pair (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") has only " +
                                std::to_string(corrs.size()) + " matches");
    ViewingGraph::EdgeData data;
    data.block = eight_point(corrs);
    data.weight = static_cast<double>(corrs.size());
    G.edges[{i, j}] = data;
  }
  return G;
}

void corrupt_block(ViewingGraph& G, int i, int j, uint64_t seed) {
  Rng rng(seed);
  Mat3 M;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) M(r, c) = rng.normal();
  Mat3 F = svp(M, 2);
  F /= F.norm();
  G.edges.at(ViewingGraph::ordered(i, j)).block = F;
}

namespace {

struct TripletEpipoles {
  // e[image][of camera]: unit homogeneous epipoles per triplet view.
  Vec3 e_i_from_j, e_j_from_i;
  Vec3 e_i_from_k, e_k_from_i;
  Vec3 e_j_from_k, e_k_from_j;
  bool valid = false;
};

TripletEpipoles triplet_epipoles(const Mat3& F_ij, const Mat3& F_ik,
                                 const Mat3& F_jk) {
  TripletEpipoles out;
  try {
    std::tie(out.e_i_from_j, out.e_j_from_i) = epipoles(F_ij, 2.0);
    std::tie(out.e_i_from_k, out.e_k_from_i) = epipoles(F_ik, 2.0);
    std::tie(out.e_j_from_k, out.e_k_from_j) = epipoles(F_jk, 2.0);
  } catch (const RankDeficiencyError&) {
    return out;
  }
  for (const Vec3* e : {&out.e_i_from_j, &out.e_j_from_i, &out.e_i_from_k,
                        &out.e_k_from_i, &out.e_j_from_k, &out.e_k_from_j})
    if (std::abs(e->z()) < 1e-12) return out;
  out.valid = true;
  return out;
}

Vec2 dehom(const Vec3& v) { return Vec2(v.x() / v.z(), v.y() / v.z()); }

// |S_ijk + S_jki + S_kij| plus the individual terms, or nothing when an
// epipole cannot be dehomogenized.
bool epipole_consistency_terms(const Mat3& F_ij, const Mat3& F_ik,
                               const Mat3& F_jk, double* sum, double* terms) {
  const TripletEpipoles ep = triplet_epipoles(F_ij, F_ik, F_jk);
  if (!ep.valid) return false;
  const double S_ijk =
      symmetric_epipolar_distance(F_ij, dehom(ep.e_i_from_k), dehom(ep.e_j_from_k));
  const double S_jki =
      symmetric_epipolar_distance(F_jk, dehom(ep.e_j_from_i), dehom(ep.e_k_from_i));
  const double S_kij =
      symmetric_epipolar_distance(F_ik, dehom(ep.e_i_from_j), dehom(ep.e_k_from_j));
  *sum = std::abs(S_ijk + S_jki + S_kij);
  *terms = (std::abs(S_ijk) + std::abs(S_jki) + std::abs(S_kij)) / 3.0;
  return true;
}

double mean_epipole_consistency(const NViewFundamental& F,
                                const std::vector<Triplet>& triplets,
                                double* mean_term) {
  double sum = 0.0, term_sum = 0.0;
  int counted = 0;
  for (const Triplet& t : triplets) {
    double s = 0.0, terms = 0.0;
    if (!epipole_consistency_terms(F.block(t[0], t[1]), F.block(t[0], t[2]),
                                   F.block(t[1], t[2]), &s, &terms))
      continue;
    sum += s;
    term_sum += terms;
    ++counted;
  }
  if (mean_term) *mean_term = counted > 0 ? term_sum / counted : 0.0;
  return counted > 0 ? sum / counted : 0.0;
}

}  // namespace

std::vector<ConsistencyRow> consistency_experiment(
    const SceneSpec& spec, const std::vector<double>& sigma_list,
    int n_triplets, const AdmmConfig& cfg) {
  if (spec.n_cameras < 4)
    throw std::invalid_argument("the sweep needs at least four cameras");
  if (sigma_list.empty())
    throw std::invalid_argument("empty noise level list");

  // The triplet sample is a function of the seed only, shared across noise
  // levels so the curves compare like against like.
  std::vector<Triplet> all;
  for (int i = 0; i < spec.n_cameras; ++i)
    for (int j = i + 1; j < spec.n_cameras; ++j)
      for (int k = j + 1; k < spec.n_cameras; ++k)
        all.push_back(make_triplet(i, j, k));
  Rng pick(spec.seed * 0x9e3779b97f4a7c15ULL + 1);
  for (size_t idx = all.size(); idx > 1; --idx)
    std::swap(all[idx - 1], all[pick.uniform_int(0, static_cast<int>(idx) - 1)]);
  const int m = std::min<int>(n_triplets, static_cast<int>(all.size()));
  std::vector<Triplet> triplets(all.begin(), all.begin() + m);
  std::sort(triplets.begin(), triplets.end());

  std::vector<std::pair<int, int>> pairs;
  for (const Triplet& t : triplets)
    for (const auto& e : {std::pair{t[0], t[1]}, std::pair{t[0], t[2]},
                          std::pair{t[1], t[2]}})
      if (std::find(pairs.begin(), pairs.end(), e) == pairs.end())
        pairs.push_back(e);
  std::sort(pairs.begin(), pairs.end());

  std::vector<ConsistencyRow> rows;
  for (const double sigma : sigma_list) {
    SceneSpec noisy = spec;
    noisy.noise_sigma = sigma;
    const SceneBundle bundle = generate_scene(noisy);
    const ViewingGraph G = estimate_pairwise(bundle, pairs);

    NViewFundamental measured(spec.n_cameras);
    for (const auto& [key, data] : G.edges)
      measured.set_block(key.first, key.second, data.block);

    ConsistencyRow row;
    row.sigma = sigma;
    row.raw_epipole_consistency =
        mean_epipole_consistency(measured, triplets, nullptr);

    const auto [solved, diag] = solve(measured, triplets, cfg);
    row.epipole_consistency =
        mean_epipole_consistency(solved, triplets, &row.mean_term);

    double frob = 0.0;
    for (const auto& [i, j] : pairs) {
      const Mat3 gt = compose_fundamental(bundle.cams[i].V, bundle.cams[i].t,
                                          bundle.cams[j].V, bundle.cams[j].t);
      Mat3 rec = solved.block(i, j);
      rec /= rec.norm();
      const double scale = (rec.array() * gt.array()).sum() / gt.squaredNorm();
      frob += (rec - scale * gt).norm();
    }
    row.frobenius_error = frob / pairs.size();

    double dist = 0.0;
    long count = 0;
    for (const auto& [i, j] : pairs) {
      const Mat3 rec = solved.block(i, j);
      for (size_t idx = 0; idx < bundle.tracks.size(); ++idx) {
        bool in_i = false, in_j = false;
        for (const Observation& o : bundle.tracks[idx].obs) {
          in_i = in_i || o.view == i;
          in_j = in_j || o.view == j;
        }
        if (!in_i || !in_j) continue;
        dist += symmetric_epipolar_distance(rec, bundle.clean_projection(idx, i),
                                            bundle.clean_projection(idx, j));
        ++count;
      }
    }
    row.gt_epipolar_distance = count > 0 ? dist / count : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mvfund

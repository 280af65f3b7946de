#include "mvfund/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mvfund {

namespace {

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_double(const std::string& tok, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) fail(line_no, "bad number '" + tok + "'");
  if (!std::isfinite(v)) fail(line_no, "non-finite number '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok, int line_no) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size()) fail(line_no, "bad integer '" + tok + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ViewingGraph ProblemFile::graph() const {
  ViewingGraph G;
  G.n = n;
  G.edges = blocks;
  G.metas = metas;
  return G;
}

ProblemFile parse_problem(const std::string& text) {
  ProblemFile problem;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false, have_n = false;
  std::vector<bool> meta_seen;
  std::map<long, size_t> track_index;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tokens = split(line);
    if (tokens.empty()) continue;

    if (!have_header) {
      if (tokens.size() != 2 || tokens[0] != "MVFUND" || tokens[1] != "1")
        fail(line_no, "expected header 'MVFUND 1'");
      have_header = true;
      continue;
    }
    if (!have_n) {
      if (tokens.size() != 2 || tokens[0] != "N")
        fail(line_no, "expected 'N <views>'");
      problem.n = static_cast<int>(parse_long(tokens[1], line_no));
      if (problem.n < 2) fail(line_no, "need at least two views");
      problem.metas.resize(problem.n);
      meta_seen.assign(problem.n, false);
      have_n = true;
      continue;
    }

    if (tokens[0] == "V") {
      if (tokens.size() != 6) fail(line_no, "expected 'V view w h cx cy'");
      const long v = parse_long(tokens[1], line_no);
      if (v < 0 || v >= problem.n) fail(line_no, "view index out of range");
      if (meta_seen[v]) fail(line_no, "duplicate metadata for view");
      meta_seen[v] = true;
      ImageMeta meta;
      meta.view = static_cast<int>(v);
      meta.width = parse_double(tokens[2], line_no);
      meta.height = parse_double(tokens[3], line_no);
      meta.center =
          Vec2(parse_double(tokens[4], line_no), parse_double(tokens[5], line_no));
      if (meta.width <= 0.0 || meta.height <= 0.0)
        fail(line_no, "image dimensions must be positive");
      problem.metas[v] = meta;
    } else if (tokens[0] == "F") {
      if (tokens.size() != 13)
        fail(line_no, "expected 'F i j m00..m22 weight'");
      const long i = parse_long(tokens[1], line_no);
      const long j = parse_long(tokens[2], line_no);
      if (i < 0 || j <= i || j >= problem.n)
        fail(line_no, "block indices must satisfy 0 <= i < j < n");
      if (problem.blocks.count({static_cast<int>(i), static_cast<int>(j)}))
        fail(line_no, "duplicate block");
      ViewingGraph::EdgeData data;
      for (int idx = 0; idx < 9; ++idx)
        data.block(idx / 3, idx % 3) = parse_double(tokens[3 + idx], line_no);
      data.weight = parse_double(tokens[12], line_no);
      if (data.weight < 0.0) fail(line_no, "negative weight");
      problem.blocks[{static_cast<int>(i), static_cast<int>(j)}] = data;
    } else if (tokens[0] == "T") {
      if (tokens.size() != 5) fail(line_no, "expected 'T point view x y'");
      const long pid = parse_long(tokens[1], line_no);
      const long view = parse_long(tokens[2], line_no);
      if (view < 0 || view >= problem.n) fail(line_no, "view index out of range");
      Observation o;
      o.view = static_cast<int>(view);
      o.xy = Vec2(parse_double(tokens[3], line_no),
                  parse_double(tokens[4], line_no));
      auto it = track_index.find(pid);
      if (it == track_index.end()) {
        track_index[pid] = problem.tracks.size();
        problem.track_ids.push_back(pid);
        problem.tracks.emplace_back();
        it = track_index.find(pid);
      }
      problem.tracks[it->second].obs.push_back(o);
    } else {
      fail(line_no, "unknown record '" + tokens[0] + "'");
    }
  }

  if (!have_header) throw ParseError("line 1: missing header 'MVFUND 1'");
  if (!have_n) throw ParseError("line 1: missing 'N <views>'");
  for (int v = 0; v < problem.n; ++v)
    if (!meta_seen[v])
      throw ParseError("missing 'V' metadata for view " + std::to_string(v));
  return problem;
}

ProblemFile read_problem(const std::string& path) {
  return parse_problem(read_file(path));
}

std::string serialize_problem(const ProblemFile& problem) {
  std::ostringstream out;
  out << "MVFUND 1\n";
  out << "N " << problem.n << "\n";
  for (int v = 0; v < problem.n; ++v) {
    const ImageMeta& m = problem.metas[v];
    out << "V " << v << " " << format_double(m.width) << " "
        << format_double(m.height) << " " << format_double(m.center.x()) << " "
        << format_double(m.center.y()) << "\n";
  }
  for (const auto& [key, data] : problem.blocks) {
    out << "F " << key.first << " " << key.second;
    for (int idx = 0; idx < 9; ++idx)
      out << " " << format_double(data.block(idx / 3, idx % 3));
    out << " " << format_double(data.weight) << "\n";
  }
  for (size_t t = 0; t < problem.tracks.size(); ++t)
    for (const Observation& o : problem.tracks[t].obs)
      out << "T " << problem.track_ids[t] << " " << o.view << " "
          << format_double(o.xy.x()) << " " << format_double(o.xy.y()) << "\n";
  return out.str();
}

void write_problem(const std::string& path, const ProblemFile& problem) {
  write_file(path, serialize_problem(problem));
}

std::string serialize_reconstruction(const ReconstructionFile& recon) {
  std::ostringstream out;
  out << "MVFUND-RECON 1\n";
  out << "N " << recon.n << "\n";
  for (int v = 0; v < recon.n; ++v) {
    out << "P " << v;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c)
        out << " " << format_double(recon.cameras[v].P(r, c));
    out << "\n";
  }
  for (size_t idx = 0; idx < recon.points.size(); ++idx) {
    out << "X " << recon.point_ids[idx];
    for (int c = 0; c < 4; ++c)
      out << " " << format_double(recon.points[idx](c));
    out << "\n";
  }
  out << "S n_points " << recon.points.size() << "\n";
  out << "S mean_reprojection_px " << format_double(recon.mean_reprojection_px)
      << "\n";
  out << "S observations " << recon.observations << "\n";
  out << "S invalid_tracks " << recon.invalid_tracks << "\n";
  out << "S cover_size " << recon.cover_size << "\n";
  out << "S admm_iterations " << recon.admm_iterations << "\n";
  out << "S sigma76_mean " << format_double(recon.sigma76_mean) << "\n";
  out << "S final_relative_residual "
      << format_double(recon.final_relative_residual) << "\n";
  return out.str();
}

void write_reconstruction(const std::string& path,
                          const ReconstructionFile& recon) {
  write_file(path, serialize_reconstruction(recon));
}

ReconstructionFile read_reconstruction(const std::string& path) {
  const std::string text = read_file(path);
  ReconstructionFile recon;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false, have_n = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    if (!have_header) {
      if (tokens.size() != 2 || tokens[0] != "MVFUND-RECON")
        fail(line_no, "expected header 'MVFUND-RECON 1'");
      have_header = true;
      continue;
    }
    if (!have_n) {
      if (tokens.size() != 2 || tokens[0] != "N") fail(line_no, "expected N");
      recon.n = static_cast<int>(parse_long(tokens[1], line_no));
      recon.cameras.resize(recon.n);
      have_n = true;
      continue;
    }
    if (tokens[0] == "P") {
      if (tokens.size() != 14) fail(line_no, "expected 'P i p00..p23'");
      const long v = parse_long(tokens[1], line_no);
      if (v < 0 || v >= recon.n) fail(line_no, "camera index out of range");
      for (int idx = 0; idx < 12; ++idx)
        recon.cameras[v].P(idx / 4, idx % 4) =
            parse_double(tokens[2 + idx], line_no);
    } else if (tokens[0] == "X") {
      if (tokens.size() != 6) fail(line_no, "expected 'X id x y z w'");
      recon.point_ids.push_back(parse_long(tokens[1], line_no));
      Vec4 X;
      for (int c = 0; c < 4; ++c) X(c) = parse_double(tokens[2 + c], line_no);
      recon.points.push_back(X);
    } else if (tokens[0] == "S") {
      if (tokens.size() != 3) fail(line_no, "expected 'S key value'");
      const std::string& key = tokens[1];
      if (key == "mean_reprojection_px")
        recon.mean_reprojection_px = parse_double(tokens[2], line_no);
      else if (key == "observations")
        recon.observations = static_cast<int>(parse_long(tokens[2], line_no));
      else if (key == "invalid_tracks")
        recon.invalid_tracks = static_cast<int>(parse_long(tokens[2], line_no));
      else if (key == "cover_size")
        recon.cover_size = static_cast<int>(parse_long(tokens[2], line_no));
      else if (key == "admm_iterations")
        recon.admm_iterations = static_cast<int>(parse_long(tokens[2], line_no));
      else if (key == "sigma76_mean")
        recon.sigma76_mean = parse_double(tokens[2], line_no);
      else if (key == "final_relative_residual")
        recon.final_relative_residual = parse_double(tokens[2], line_no);
      // unknown summary keys are ignored
    } else {
      fail(line_no, "unknown record '" + tokens[0] + "'");
    }
  }
  if (!have_header || !have_n) throw ParseError("truncated reconstruction file");
  return recon;
}

std::string serialize_ground_truth(const GroundTruthFile& gt) {
  std::ostringstream out;
  out << "MVFUND-GT 1\n";
  out << "N " << gt.cams.size() << "\n";
  for (size_t v = 0; v < gt.cams.size(); ++v) {
    out << "C " << v;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << " " << format_double(gt.cams[v].V(r, c));
    for (int c = 0; c < 3; ++c) out << " " << format_double(gt.cams[v].t(c));
    out << "\n";
  }
  for (size_t idx = 0; idx < gt.points.size(); ++idx) {
    out << "Y " << idx;
    for (int c = 0; c < 3; ++c) out << " " << format_double(gt.points[idx](c));
    out << "\n";
  }
  return out.str();
}

void write_ground_truth(const std::string& path, const GroundTruthFile& gt) {
  write_file(path, serialize_ground_truth(gt));
}

GroundTruthFile read_ground_truth(const std::string& path) {
  const std::string text = read_file(path);
  GroundTruthFile gt;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false, have_n = false;
  long n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    if (!have_header) {
      if (tokens.size() != 2 || tokens[0] != "MVFUND-GT")
        fail(line_no, "expected header 'MVFUND-GT 1'");
      have_header = true;
      continue;
    }
    if (!have_n) {
      if (tokens.size() != 2 || tokens[0] != "N") fail(line_no, "expected N");
      n = parse_long(tokens[1], line_no);
      gt.cams.resize(n);
      have_n = true;
      continue;
    }
    if (tokens[0] == "C") {
      if (tokens.size() != 14) fail(line_no, "expected 'C view V.. t..'");
      const long v = parse_long(tokens[1], line_no);
      if (v < 0 || v >= n) fail(line_no, "camera index out of range");
      for (int idx = 0; idx < 9; ++idx)
        gt.cams[v].V(idx / 3, idx % 3) = parse_double(tokens[2 + idx], line_no);
      for (int c = 0; c < 3; ++c)
        gt.cams[v].t(c) = parse_double(tokens[11 + c], line_no);
    } else if (tokens[0] == "Y") {
      if (tokens.size() != 5) fail(line_no, "expected 'Y id x y z'");
      Vec3 p;
      for (int c = 0; c < 3; ++c) p(c) = parse_double(tokens[2 + c], line_no);
      gt.points.push_back(p);
    } else {
      fail(line_no, "unknown record '" + tokens[0] + "'");
    }
  }
  if (!have_header || !have_n) throw ParseError("truncated ground truth file");
  return gt;
}

}  // namespace mvfund

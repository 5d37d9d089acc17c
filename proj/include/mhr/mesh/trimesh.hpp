// Copyright Contributors to the mhr Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mhr/core/common.hpp>
#include <mhr/core/rng.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mhr {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

inline Vec3 face_normal(const TriMesh& mesh, int f) {
  const auto& tri = mesh.faces[f];
  Vec3 e0 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
  Vec3 e1 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
  return e0.cross(e1);  // length = 2 * area
}

inline std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = face_normal(mesh, f);  // area weighting
    for (int k = 0; k < 3; ++k) normals[mesh.faces[f][k]] += n;
  }
  for (Vec3& n : normals) {
    double len = n.norm();
    if (len > 1e-12) n /= len;
  }
  return normals;
}

inline double surface_area(const TriMesh& mesh) {
  double area = 0;
  for (int f = 0; f < mesh.face_count(); ++f) area += 0.5 * face_normal(mesh, f).norm();
  return area;
}

// Euler characteristic V - E + F per connected component; every component of
// a closed (watertight) mesh scores 2.
inline std::vector<int> euler_characteristics(const TriMesh& mesh) {
  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::set<std::pair<int, int>> edges;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
      parent[find(a)] = find(b);
    }
  std::map<int, std::array<long, 3>> counts;  // root -> (V, E, F)
  for (int v = 0; v < mesh.vertex_count(); ++v) counts[find(v)][0]++;
  for (const auto& e : edges) counts[find(e.first)][1]++;
  for (const auto& f : mesh.faces) counts[find(f[0])][2]++;
  std::vector<int> euler;
  for (const auto& [root, vef] : counts)
    euler.push_back(static_cast<int>(vef[0] - vef[1] + vef[2]));
  return euler;
}

inline void save_obj(const std::string& path, const TriMesh& mesh) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ValidationError("cannot write OBJ: " + path);
  for (const Vec3& v : mesh.vertices)
    std::fprintf(f, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
  for (const auto& face : mesh.faces)
    std::fprintf(f, "f %d %d %d\n", face[0] + 1, face[1] + 1, face[2] + 1);
  std::fclose(f);
}

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open OBJ: " + path);
  TriMesh mesh;
  std::string tag;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    is >> tag;
    if (tag == "v") {
      Vec3 v;
      is >> v.x() >> v.y() >> v.z();
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> face{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        is >> tok;
        face[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      mesh.faces.push_back(face);
    }
  }
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k)
      if (f[k] < 0 || f[k] >= mesh.vertex_count())
        throw ValidationError(path + ": face index out of range");
  return mesh;
}

// Area-weighted uniform surface samples; the chamfer metric consumes these.
inline std::vector<Vec3> sample_surface_points(const TriMesh& mesh, int count, Rng& rng) {
  MHR_CHECK(mesh.face_count() > 0);
  std::vector<double> cumulative(mesh.face_count());
  double total = 0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    total += 0.5 * face_normal(mesh, f).norm();
    cumulative[f] = total;
  }
  MHR_CHECK_MSG(total > 0, "sample_surface_points: zero-area mesh");
  std::vector<Vec3> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    double r = rng.uniform(0, total);
    int f = static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), r) -
                             cumulative.begin());
    f = std::min(f, mesh.face_count() - 1);
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const auto& tri = mesh.faces[f];
    points.push_back(mesh.vertices[tri[0]] +
                     u * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
                     v * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]));
  }
  return points;
}

}  // namespace mhr

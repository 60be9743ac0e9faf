#include "hybridns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hybridns {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

TriMesh::TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
                 std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      vertex_edges_(vertices_.size()) {
  const std::size_t nv = vertices_.size();
  if (triangles_.empty()) throw std::invalid_argument("TriMesh: no triangles");

  std::vector<char> referenced(nv, 0);
  tri_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (auto v : tri) {
      if (v >= nv) throw std::invalid_argument("TriMesh: triangle vertex out of range");
      referenced[v] = 1;
    }
    if (!(triangle_area(t) > 0.0)) {
      throw std::invalid_argument("TriMesh: triangle " + std::to_string(t) +
                                  " is not counter-clockwise with positive area");
    }
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = std::min(tri[k], tri[(k + 1) % 3]);
      const std::size_t b = std::max(tri[k], tri[(k + 1) % 3]);
      std::size_t id = edges_.size();
      for (const auto& [other, e] : vertex_edges_[a]) {
        if (other == b) id = e;
      }
      if (id == edges_.size()) {
        edges_.push_back({a, b});
        edge_count_.push_back(0);
        vertex_edges_[a].emplace_back(b, id);
        vertex_edges_[b].emplace_back(a, id);
      }
      if (++edge_count_[id] > 2) {
        throw std::invalid_argument("TriMesh: edge shared by more than two triangles");
      }
      tri_edges_[t][k] = id;
    }
  }
  if (std::find(referenced.begin(), referenced.end(), 0) != referenced.end()) {
    throw std::invalid_argument("TriMesh: vertex not referenced by any triangle");
  }

  std::vector<int> edge_tag(edges_.size(), 0);
  for (auto& be : boundary_edges_) {
    if (be.tag < 1) throw std::invalid_argument("TriMesh: boundary tags must be >= 1");
    std::size_t e = 0;
    try {
      e = edge_index(be.vertices[0], be.vertices[1]);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("TriMesh: tagged edge is not a mesh edge");
    }
    if (edge_count_[e] != 1) throw std::invalid_argument("TriMesh: tagged edge is interior");
    if (edge_tag[e] != 0) throw std::invalid_argument("TriMesh: boundary edge tagged twice");
    edge_tag[e] = be.tag;
    tags_.insert(be.tag);
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_count_[e] == 1 && edge_tag[e] == 0) {
      throw std::invalid_argument("TriMesh: untagged boundary edge (" +
                                  std::to_string(edges_[e][0]) + ", " +
                                  std::to_string(edges_[e][1]) + ")");
    }
  }
  int expected = 1;
  for (int tag : tags_) {
    if (tag != expected++) {
      throw std::invalid_argument("TriMesh: boundary tags must be contiguous from 1");
    }
  }
}

std::size_t TriMesh::edge_index(std::size_t a, std::size_t b) const {
  if (a < vertex_edges_.size()) {
    for (const auto& [other, e] : vertex_edges_[a]) {
      if (other == b) return e;
    }
  }
  throw std::out_of_range("TriMesh::edge_index: no edge (" + std::to_string(a) + ", " +
                          std::to_string(b) + ")");
}

double TriMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += triangle_area(t);
  return sum;
}

MeshParseError::MeshParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace hybridns

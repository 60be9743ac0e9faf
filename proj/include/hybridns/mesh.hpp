#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridns {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

using Triangle = std::array<std::size_t, 3>;

struct BoundaryEdge {
  std::array<std::size_t, 2> vertices;
  int tag = 0;
};

/// Conforming triangulation with tagged boundary edges. Immutable after
/// construction; the constructor enforces every structural invariant.
///
/// Local edge k of a triangle joins local vertices k and (k+1) % 3. Edge
/// indices are assigned in first-encounter order over triangles, so the
/// numbering is a pure function of the triangle list.
class TriMesh {
 public:
  TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
          std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_triangles() const { return triangles_.size(); }
  std::size_t n_edges() const { return edges_.size(); }

  /// Endpoints of edge e, smaller index first.
  const std::array<std::size_t, 2>& edge(std::size_t e) const { return edges_[e]; }
  /// Edge indices of triangle t in local order (0-1, 1-2, 2-0).
  const std::array<std::size_t, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }
  /// Edge joining a and b (either order); throws std::out_of_range if absent.
  std::size_t edge_index(std::size_t a, std::size_t b) const;
  /// Number of triangles sharing edge e (1 on the boundary, 2 inside).
  int edge_triangle_count(std::size_t e) const { return edge_count_[e]; }

  double triangle_area(std::size_t t) const;
  double total_area() const;
  /// Sorted set of boundary tags; always {1, ..., max}.
  const std::set<int>& boundary_tags() const { return tags_; }

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::vector<std::array<std::size_t, 3>> tri_edges_;
  std::vector<int> edge_count_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> vertex_edges_;
  std::set<int> tags_;
};

double signed_area(const Point2& a, const Point2& b, const Point2& c);

/// Structured nx-by-ny grid, each cell split along its lower-left to
/// upper-right diagonal. Tags: 1 bottom, 2 right, 3 top, 4 left.
TriMesh generate_rect_mesh(Interval x_range, Interval y_range, std::size_t nx, std::size_t ny);

/// Footprint of the obstacle block in the channel-step domain.
struct StepFootprint {
  double x0 = 5.0;
  double x1 = 6.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

/// Channel [0,40]x[0,10] on an nx-by-ny grid with the step cells removed.
/// Tags: 1 bottom wall and step perimeter, 2 outflow (x = 40), 3 top wall,
/// 4 inflow (x = 0). Throws std::invalid_argument when the step does not
/// align with cell boundaries.
TriMesh generate_channel_step_mesh(std::size_t nx, std::size_t ny, StepFootprint step = {});

/// Parse failure with a 1-based line number.
class MeshParseError : public std::runtime_error {
 public:
  MeshParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the Gmsh MSH 2.2 ASCII subset documented in docs/file_formats.md.
TriMesh parse_gmsh(std::istream& in);
TriMesh read_gmsh_file(const std::string& path);
/// Writes a mesh in the same subset; parse_gmsh(write_gmsh(m)) reproduces m.
void write_gmsh(const TriMesh& mesh, std::ostream& out);

}  // namespace hybridns

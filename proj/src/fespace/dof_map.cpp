#include <algorithm>

#include "hybridns/fespace.hpp"

namespace hybridns {

DofMap::DofMap(const TriMesh& mesh)
    : mesh_(&mesh), n_scalar_(mesh.n_vertices() + mesh.n_edges()) {
  nodes_.reserve(n_scalar_);
  nodes_.insert(nodes_.end(), mesh.vertices().begin(), mesh.vertices().end());
  for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
    const auto& a = mesh.vertices()[mesh.edge(e)[0]];
    const auto& b = mesh.vertices()[mesh.edge(e)[1]];
    nodes_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }
}

std::array<std::size_t, 6> DofMap::scalar_nodes(std::size_t t) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& ed = mesh_->triangle_edges(t);
  const std::size_t nv = mesh_->n_vertices();
  return {tri[0], tri[1], tri[2], nv + ed[0], nv + ed[1], nv + ed[2]};
}

std::vector<std::size_t> boundary_scalar_nodes(const TriMesh& mesh, const DofMap& dofmap,
                                               const std::set<int>& tags) {
  if (tags.empty()) throw std::invalid_argument("boundary_dofs: empty tag set");
  for (int tag : tags) {
    if (!mesh.boundary_tags().count(tag)) {
      throw std::invalid_argument("boundary_dofs: unknown boundary tag " + std::to_string(tag));
    }
  }
  std::vector<char> on(dofmap.n_velocity_scalar(), 0);
  for (const auto& be : mesh.boundary_edges()) {
    if (!tags.count(be.tag)) continue;
    on[be.vertices[0]] = 1;
    on[be.vertices[1]] = 1;
    on[mesh.n_vertices() + mesh.edge_index(be.vertices[0], be.vertices[1])] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < on.size(); ++s) {
    if (on[s]) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> boundary_dofs(const TriMesh& mesh, const DofMap& dofmap,
                                       const std::set<int>& tags) {
  const auto nodes = boundary_scalar_nodes(mesh, dofmap, tags);
  std::vector<std::size_t> out;
  out.reserve(2 * nodes.size());
  for (int c = 0; c < 2; ++c) {
    for (auto s : nodes) out.push_back(dofmap.velocity_dof(c, s));
  }
  return out;  // x-block indices precede y-block indices, so this is ascending
}

P2Element::P2Element(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  for (int k = 0; k < 3; ++k) corners_[k] = mesh.vertices()[tri[k]];
  const double x10 = corners_[1].x - corners_[0].x;
  const double y10 = corners_[1].y - corners_[0].y;
  const double x20 = corners_[2].x - corners_[0].x;
  const double y20 = corners_[2].y - corners_[0].y;
  const double det = x10 * y20 - x20 * y10;
  area_ = 0.5 * det;
  grad_l_[1] = {y20 / det, -x20 / det};
  grad_l_[2] = {-y10 / det, x10 / det};
  grad_l_[0] = {-grad_l_[1].x - grad_l_[2].x, -grad_l_[1].y - grad_l_[2].y};
}

Point2 P2Element::map(const std::array<double, 3>& l) const {
  return {l[0] * corners_[0].x + l[1] * corners_[1].x + l[2] * corners_[2].x,
          l[0] * corners_[0].y + l[1] * corners_[1].y + l[2] * corners_[2].y};
}

std::array<double, 6> P2Element::p2_values(const std::array<double, 3>& l) const {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> P2Element::p2_gradients(const std::array<double, 3>& l) const {
  std::array<Vec2, 6> g;
  for (int i = 0; i < 3; ++i) {
    const double s = 4.0 * l[i] - 1.0;
    g[i] = {s * grad_l_[i].x, s * grad_l_[i].y};
  }
  for (int k = 0; k < 3; ++k) {
    const int i = k;
    const int j = (k + 1) % 3;
    g[3 + k] = {4.0 * (l[i] * grad_l_[j].x + l[j] * grad_l_[i].x),
                4.0 * (l[i] * grad_l_[j].y + l[j] * grad_l_[i].y)};
  }
  return g;
}

}  // namespace hybridns

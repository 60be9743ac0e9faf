#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "hybridns/fields.hpp"
#include "hybridns/krylov.hpp"
#include "hybridns/mesh.hpp"
#include "hybridns/sparse_matrix.hpp"

namespace hybridns {

// ---------------------------------------------------------------------------
// Quadrature

struct QuadraturePoint {
  std::array<double, 3> barycentric;
  /// Weight on the reference triangle; weights of a rule sum to 1/2.
  double weight;
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  int degree;
};

/// 7-point rule exact for polynomials of total degree <= 5.
const QuadratureRule& degree5_rule();

// ---------------------------------------------------------------------------
// Degrees of freedom

/// Taylor-Hood P2/P1 layout. Scalar velocity nodes are the mesh vertices
/// followed by edge midpoints; velocity dofs are component-blocked
/// [x-dofs..., y-dofs...]; pressure dofs are the vertices.
class DofMap {
 public:
  explicit DofMap(const TriMesh& mesh);

  const TriMesh& mesh() const { return *mesh_; }
  std::size_t n_velocity_scalar() const { return n_scalar_; }
  std::size_t n_velocity() const { return 2 * n_scalar_; }
  std::size_t n_pressure() const { return mesh_->n_vertices(); }

  std::size_t velocity_dof(int component, std::size_t scalar_node) const {
    return static_cast<std::size_t>(component) * n_scalar_ + scalar_node;
  }
  /// Local P2 nodes of triangle t: three vertices, then midpoints of local
  /// edges 0-1, 1-2, 2-0.
  std::array<std::size_t, 6> scalar_nodes(std::size_t t) const;
  std::array<std::size_t, 3> pressure_nodes(std::size_t t) const { return mesh_->triangles()[t]; }
  /// Coordinates of a scalar velocity node.
  const Point2& node(std::size_t scalar_node) const { return nodes_[scalar_node]; }

 private:
  const TriMesh* mesh_;
  std::size_t n_scalar_;
  std::vector<Point2> nodes_;
};

/// Velocity dofs (both components, vertex and midpoint nodes) on edges with
/// the given tags, ascending. Throws std::invalid_argument for an empty set or
/// a tag the mesh does not carry.
std::vector<std::size_t> boundary_dofs(const TriMesh& mesh, const DofMap& dofmap,
                                       const std::set<int>& tags);

/// Scalar velocity nodes on edges with the given tags, ascending.
std::vector<std::size_t> boundary_scalar_nodes(const TriMesh& mesh, const DofMap& dofmap,
                                               const std::set<int>& tags);

// ---------------------------------------------------------------------------
// Reference element on a physical triangle

class P2Element {
 public:
  P2Element(const TriMesh& mesh, std::size_t t);

  double area() const { return area_; }
  /// Physical point for barycentric coordinates.
  Point2 map(const std::array<double, 3>& bary) const;
  std::array<double, 6> p2_values(const std::array<double, 3>& bary) const;
  std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& bary) const;
  const std::array<Vec2, 3>& p1_gradients() const { return grad_l_; }

 private:
  std::array<Point2, 3> corners_;
  std::array<Vec2, 3> grad_l_;
  double area_;
};

// ---------------------------------------------------------------------------
// Assembly

/// Sparsity pattern plus, for every element, the value positions of its local
/// matrix. Assembly scatters element contributions in element order, so equal
/// inputs give bitwise-equal matrices.
class ElementScatter {
 public:
  ElementScatter(std::size_t rows, std::size_t cols,
                 const std::vector<std::vector<std::size_t>>& element_rows,
                 const std::vector<std::vector<std::size_t>>& element_cols);

  std::size_t n_elements() const { return local_rows_.size(); }
  std::size_t local_rows(std::size_t e) const { return local_rows_[e]; }
  std::size_t local_cols(std::size_t e) const { return local_cols_[e]; }

  /// `kernel(e, local)` fills the row-major local matrix of element e.
  template <typename Kernel>
  SparseMatrix assemble(Kernel&& kernel) const {
    SparseMatrix out = pattern_;
    auto values = out.values();
    std::vector<double> local;
    for (std::size_t e = 0; e < local_rows_.size(); ++e) {
      local.assign(local_rows_[e] * local_cols_[e], 0.0);
      kernel(e, std::span<double>(local));
      const auto& pos = positions_[e];
      for (std::size_t k = 0; k < local.size(); ++k) values[pos[k]] += local[k];
    }
    return out;
  }

  const SparseMatrix& pattern() const { return pattern_; }

 private:
  SparseMatrix pattern_;
  std::vector<std::vector<std::size_t>> positions_;
  std::vector<std::size_t> local_rows_;
  std::vector<std::size_t> local_cols_;
};

/// Element dof lists used by the velocity and pressure operators. Velocity
/// element lists hold the six x-dofs followed by the six y-dofs.
struct TaylorHoodScatter {
  explicit TaylorHoodScatter(const DofMap& dofmap);
  ElementScatter velocity;           // velocity x velocity, full 12x12 coupling
  ElementScatter pressure;           // pressure x pressure
  ElementScatter pressure_velocity;  // pressure rows x velocity columns
};

/// M_ij = int phi_i . phi_j (block-diagonal in the components).
SparseMatrix assemble_velocity_mass(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// A_ij = int grad phi_i : grad phi_j (no viscosity factor).
SparseMatrix assemble_stiffness(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// B_qv = int psi_q div phi_v; shape n_pressure x n_velocity.
SparseMatrix assemble_divergence(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// G_vu = int div phi_u div phi_v.
SparseMatrix assemble_graddiv(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// Consistent P1 mass matrix.
SparseMatrix assemble_pressure_mass(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// P1 Laplacian int grad psi_i . grad psi_j.
SparseMatrix assemble_pressure_stiffness(const DofMap& dofmap, const TaylorHoodScatter& scatter);
/// N(w)_vu = int (w . grad phi_u) . phi_v + 1/2 (div w) phi_u . phi_v.
SparseMatrix assemble_convection(const DofMap& dofmap, const TaylorHoodScatter& scatter,
                                 std::span<const double> w);
/// F_i = int f . phi_i with the degree-5 rule.
Vector assemble_load(const DofMap& dofmap, const VectorField& f, double t);

/// Convenience overloads that build a scatter internally.
SparseMatrix assemble_velocity_mass(const DofMap& dofmap);
SparseMatrix assemble_stiffness(const DofMap& dofmap);
SparseMatrix assemble_divergence(const DofMap& dofmap);
SparseMatrix assemble_graddiv(const DofMap& dofmap);
SparseMatrix assemble_pressure_mass(const DofMap& dofmap);
SparseMatrix assemble_convection(const DofMap& dofmap, std::span<const double> w);

/// Nodal interpolation at the P2 velocity nodes.
Vector interpolate_velocity(const DofMap& dofmap, const VectorField& g, double t);
/// Nodal interpolation at the P1 pressure nodes.
Vector interpolate_pressure(const DofMap& dofmap, const ScalarField& g, double t);

/// L2 projection onto the pressure space: solves Mp c = rhs, where rhs holds
/// the moments (r, psi_i). With rhs = B w this yields the projected divergence.
Vector project_pressure(const SparseMatrix& pressure_mass, std::span<const double> rhs,
                        double tol = 1e-12);

}  // namespace hybridns

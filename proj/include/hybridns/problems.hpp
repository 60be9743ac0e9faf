#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "hybridns/fields.hpp"
#include "hybridns/mesh.hpp"

namespace hybridns {

struct MeshSource {
  enum class Kind { rectangle, channel_step, asset };
  Kind kind = Kind::rectangle;
  Interval x{0.0, 1.0};
  Interval y{0.0, 1.0};
  std::size_t nx = 16;
  std::size_t ny = 16;
  StepFootprint step{};
  /// File name for Kind::asset, resolved against the asset directory.
  std::string asset;
};

struct ExactSolution {
  VectorField u;
  ScalarField p;
};

struct ProblemDef {
  std::string name;
  MeshSource mesh;
  double Re = 1.0;
  /// When true the initial state is the steady Stokes solution; otherwise u0/p0.
  bool stokes_initial = false;
  VectorField u0;
  ScalarField p0;
  /// Velocity Dirichlet data per boundary tag.
  std::map<int, VectorField> dirichlet;
  VectorField force;
  std::optional<ExactSolution> exact;
  /// Pure Dirichlet problems fix the pressure only up to a constant.
  bool pressure_mean_gauge = true;
};

/// Unit-square Taylor-Green vortex, f = 0. With `bc_time_frozen` the boundary
/// trace stays at its t = 0 value.
ProblemDef taylor_green_problem(double Re, std::size_t n = 16, bool bc_time_frozen = false);

/// u = e^t (cos y, sin x), p = (x - y)(1 + t) on the unit square, Re = 1.
ProblemDef manufactured_problem(std::size_t n = 32, double Re = 1.0);

/// Rotating flow between the unit circle and a hole of radius 0.1 at (0.5, 0);
/// Re = 1000, Stokes initial state.
ProblemDef offset_circles_problem(const std::string& asset = "offset_circles.msh");

/// Channel [0,40]x[0,10] with a unit step; parabolic in/outflow, Re = 600.
ProblemDef channel_step_problem(std::size_t nx = 80, std::size_t ny = 20,
                                StepFootprint step = {});

/// Channel inflow/outflow profile (y(10 - y)/25, 0).
Vec2 channel_profile(double y);

/// Problem by name: taylor_green, manufactured, offset_circles, channel_step.
ProblemDef problem_by_name(const std::string& name);

/// Directory used to resolve mesh assets: $HYBRIDNS_ASSET_DIR if set, else the
/// build-time default.
std::string default_asset_dir();

/// Thrown when a mesh asset cannot be found or read.
class AssetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TriMesh build_mesh(const MeshSource& source, const std::string& asset_dir);

/// Throws std::invalid_argument when a boundary tag of `mesh` has no
/// Dirichlet entry or an entry names a tag the mesh lacks.
void validate_problem(const ProblemDef& problem, const TriMesh& mesh);

}  // namespace hybridns

#include "hybridns/problems.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

namespace hybridns {

ProblemDef taylor_green_problem(double Re, std::size_t n, bool bc_time_frozen) {
  if (!(Re > 0.0)) throw std::invalid_argument("taylor_green_problem: Re must be positive");
  ProblemDef p;
  p.name = "taylor_green";
  p.mesh.nx = p.mesh.ny = n;
  p.Re = Re;
  const VectorField u = [Re](double x, double y, double t) {
    const double d = std::exp(-2.0 * t / Re);
    return Vec2{d * std::cos(x) * std::sin(y), -d * std::cos(y) * std::sin(x)};
  };
  const ScalarField pr = [Re](double x, double y, double t) {
    return -0.25 * std::exp(-4.0 * t / Re) * (std::cos(2.0 * x) + std::cos(2.0 * y));
  };
  p.u0 = u;
  p.p0 = pr;
  p.force = zero_vector_field();
  p.exact = ExactSolution{u, pr};
  VectorField trace = u;
  if (bc_time_frozen) {
    trace = [u](double x, double y, double) { return u(x, y, 0.0); };
  }
  for (int tag = 1; tag <= 4; ++tag) p.dirichlet[tag] = trace;
  return p;
}

ProblemDef manufactured_problem(std::size_t n, double Re) {
  ProblemDef p;
  p.name = "manufactured";
  p.mesh.nx = p.mesh.ny = n;
  p.Re = Re;
  const double nu = 1.0 / Re;
  const VectorField u = [](double x, double y, double t) {
    const double e = std::exp(t);
    return Vec2{e * std::cos(y), e * std::sin(x)};
  };
  const ScalarField pr = [](double x, double y, double t) { return (x - y) * (1.0 + t); };
  p.u0 = u;
  p.p0 = pr;
  // u_t + u.grad u - nu lap u + grad p for the fields above.
  p.force = [nu](double x, double y, double t) {
    const double e = std::exp(t);
    const double e2 = std::exp(2.0 * t);
    return Vec2{(1.0 + nu) * e * std::cos(y) - e2 * std::sin(x) * std::sin(y) + (1.0 + t),
                (1.0 + nu) * e * std::sin(x) + e2 * std::cos(x) * std::cos(y) - (1.0 + t)};
  };
  p.exact = ExactSolution{u, pr};
  for (int tag = 1; tag <= 4; ++tag) p.dirichlet[tag] = u;
  return p;
}

ProblemDef offset_circles_problem(const std::string& asset) {
  ProblemDef p;
  p.name = "offset_circles";
  p.mesh.kind = MeshSource::Kind::asset;
  p.mesh.asset = asset;
  p.Re = 1000.0;
  p.stokes_initial = true;
  p.force = [](double x, double y, double) {
    const double s = 1.0 - x * x - y * y;
    return Vec2{-4.0 * y * s, 4.0 * x * s};
  };
  p.dirichlet[1] = zero_vector_field();  // outer circle
  p.dirichlet[2] = zero_vector_field();  // inner circle
  return p;
}

Vec2 channel_profile(double y) { return {y * (10.0 - y) / 25.0, 0.0}; }

ProblemDef channel_step_problem(std::size_t nx, std::size_t ny, StepFootprint step) {
  ProblemDef p;
  p.name = "channel_step";
  p.mesh.kind = MeshSource::Kind::channel_step;
  p.mesh.x = {0.0, 40.0};
  p.mesh.y = {0.0, 10.0};
  p.mesh.nx = nx;
  p.mesh.ny = ny;
  p.mesh.step = step;
  p.Re = 600.0;
  const VectorField profile = [](double, double y, double) { return channel_profile(y); };
  p.u0 = profile;
  p.p0 = zero_scalar_field();
  p.force = zero_vector_field();
  p.dirichlet[1] = zero_vector_field();  // bottom wall and step
  p.dirichlet[2] = profile;              // outflow
  p.dirichlet[3] = zero_vector_field();  // top wall
  p.dirichlet[4] = profile;              // inflow
  return p;
}

ProblemDef problem_by_name(const std::string& name) {
  if (name == "taylor_green") return taylor_green_problem(1.0);
  if (name == "manufactured") return manufactured_problem();
  if (name == "offset_circles") return offset_circles_problem();
  if (name == "channel_step") return channel_step_problem();
  throw std::invalid_argument("unknown problem: " + name);
}

std::string default_asset_dir() {
  if (const char* env = std::getenv("HYBRIDNS_ASSET_DIR"); env && *env) return env;
#ifdef HYBRIDNS_DEFAULT_ASSET_DIR
  return HYBRIDNS_DEFAULT_ASSET_DIR;
#else
  return "assets";
#endif
}

TriMesh build_mesh(const MeshSource& source, const std::string& asset_dir) {
  switch (source.kind) {
    case MeshSource::Kind::rectangle:
      return generate_rect_mesh(source.x, source.y, source.nx, source.ny);
    case MeshSource::Kind::channel_step:
      return generate_channel_step_mesh(source.nx, source.ny, source.step);
    case MeshSource::Kind::asset: {
      std::filesystem::path path(source.asset);
      if (path.is_relative()) path = std::filesystem::path(asset_dir) / path;
      if (!std::filesystem::exists(path)) {
        throw AssetError("mesh asset not found: " + path.string());
      }
      return read_gmsh_file(path.string());
    }
  }
  throw std::logic_error("build_mesh: unhandled mesh kind");
}

void validate_problem(const ProblemDef& problem, const TriMesh& mesh) {
  for (int tag : mesh.boundary_tags()) {
    if (!problem.dirichlet.count(tag)) {
      throw std::invalid_argument(problem.name + ": no boundary condition for tag " +
                                  std::to_string(tag));
    }
  }
  for (const auto& [tag, field] : problem.dirichlet) {
    if (!mesh.boundary_tags().count(tag)) {
      throw std::invalid_argument(problem.name + ": boundary condition for absent tag " +
                                  std::to_string(tag));
    }
    if (!field) throw std::invalid_argument(problem.name + ": empty boundary field");
  }
  if (!problem.force) throw std::invalid_argument(problem.name + ": missing force");
  if (!problem.stokes_initial && (!problem.u0 || !problem.p0)) {
    throw std::invalid_argument(problem.name + ": missing initial fields");
  }
}

}  // namespace hybridns

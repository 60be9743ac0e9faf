#include <algorithm>
#include <stdexcept>

#include "hybridns/schemes.hpp"

namespace hybridns {

namespace {

const TriMesh& validated(const TriMesh& mesh, const ProblemDef& problem) {
  validate_problem(problem, mesh);
  return mesh;
}

}  // namespace

Discretization::Discretization(TriMesh mesh, const ProblemDef& problem)
    : mesh_(std::make_unique<const TriMesh>(std::move(mesh))),
      dofmap_(validated(*mesh_, problem)),
      scatter_(dofmap_),
      dirichlet_(problem.dirichlet),
      force_(problem.force),
      gauge_(problem.pressure_mean_gauge) {
  M_ = assemble_velocity_mass(dofmap_, scatter_);
  A_ = assemble_stiffness(dofmap_, scatter_);
  B_ = assemble_divergence(dofmap_, scatter_);
  Bt_ = B_.transpose();
  G_ = assemble_graddiv(dofmap_, scatter_);
  Mp_ = assemble_pressure_mass(dofmap_, scatter_);
  mp_solver_ = std::make_unique<SpdSolver>(Mp_, 1e-12);
  mass_ones_ = Mp_ * Vector(n_pressure(), 1.0);
  for (double v : mass_ones_) area_ += v;

  std::set<int> tags;
  for (const auto& [tag, field] : dirichlet_) {
    tags.insert(tag);
    tag_nodes_.emplace_back(tag, boundary_scalar_nodes(*mesh_, dofmap_, {tag}));
  }
  dirichlet_dofs_ = boundary_dofs(*mesh_, dofmap_, tags);
}

Vector Discretization::dirichlet_values(double t) const {
  Vector g(n_velocity(), 0.0);
  // Ascending tag order; where tags meet, the larger tag wins.
  for (const auto& [tag, nodes] : tag_nodes_) {
    const auto& field = dirichlet_.at(tag);
    for (auto s : nodes) {
      const auto& p = dofmap_.node(s);
      const auto v = field(p.x, p.y, t);
      g[dofmap_.velocity_dof(0, s)] = v.x;
      g[dofmap_.velocity_dof(1, s)] = v.y;
    }
  }
  return g;
}

Vector Discretization::solve_pressure_mass(std::span<const double> r) const {
  return mp_solver_->solve(r);
}

Vector Discretization::projected_divergence(std::span<const double> w) const {
  return solve_pressure_mass(B_ * w);
}

double Discretization::pressure_mean(std::span<const double> lambda) const {
  return dot(mass_ones_, lambda) / area_;
}

void Discretization::subtract_pressure_mean(std::span<double> lambda) const {
  const double mean = pressure_mean(lambda);
  for (auto& v : lambda) v -= mean;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::hybrid_be_coupled: return "hybrid_be_coupled";
    case Method::hybrid_be_decoupled_proj: return "hybrid_be_decoupled_proj";
    case Method::hybrid_be_decoupled: return "hybrid_be_decoupled";
    case Method::hybrid_be_filtered: return "hybrid_be_filtered";
    case Method::hybrid_trapezoidal: return "hybrid_trapezoidal";
    case Method::pp_be: return "pp_be";
    case Method::ac_be: return "ac_be";
    case Method::pp_be_filtered: return "pp_be_filtered";
    case Method::ac_be_filtered: return "ac_be_filtered";
    case Method::pp_trapezoidal: return "pp_trapezoidal";
    case Method::ac_trapezoidal: return "ac_trapezoidal";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(Method::ac_trapezoidal); ++i) {
    const auto m = static_cast<Method>(i);
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

bool is_trapezoidal(Method m) {
  return m == Method::hybrid_trapezoidal || m == Method::pp_trapezoidal ||
         m == Method::ac_trapezoidal;
}

bool is_filtered(Method m) {
  return m == Method::hybrid_be_filtered || m == Method::pp_be_filtered ||
         m == Method::ac_be_filtered;
}

double modified_pressure_beta(const SchemeConfig& config) {
  const Method m = config.method;
  const bool ac = m == Method::ac_be || m == Method::ac_be_filtered || m == Method::ac_trapezoidal;
  return ac ? 0.0 : config.beta;
}

void SchemeConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(nu, "nu");
  positive(dt, "dt");
  positive(tol, "tol");
  if (!(alpha2 >= 0.0)) throw std::invalid_argument("alpha2 must be nonnegative");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(mu >= 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in [0, 1)");
}

}  // namespace hybridns

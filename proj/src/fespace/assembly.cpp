#include "hybridns/fespace.hpp"

namespace hybridns {

ElementScatter::ElementScatter(std::size_t rows, std::size_t cols,
                               const std::vector<std::vector<std::size_t>>& element_rows,
                               const std::vector<std::vector<std::size_t>>& element_cols) {
  if (element_rows.size() != element_cols.size()) {
    throw std::invalid_argument("ElementScatter: element list size mismatch");
  }
  std::vector<SparseMatrix::Triplet> trips;
  for (std::size_t e = 0; e < element_rows.size(); ++e) {
    for (auto r : element_rows[e]) {
      for (auto c : element_cols[e]) trips.push_back({r, c, 0.0});
    }
  }
  pattern_ = SparseMatrix::from_triplets(rows, cols, std::move(trips));
  positions_.resize(element_rows.size());
  local_rows_.resize(element_rows.size());
  local_cols_.resize(element_rows.size());
  for (std::size_t e = 0; e < element_rows.size(); ++e) {
    local_rows_[e] = element_rows[e].size();
    local_cols_[e] = element_cols[e].size();
    auto& pos = positions_[e];
    pos.reserve(local_rows_[e] * local_cols_[e]);
    for (auto r : element_rows[e]) {
      for (auto c : element_cols[e]) pos.push_back(pattern_.find(r, c));
    }
  }
}

namespace {

std::vector<std::vector<std::size_t>> velocity_lists(const DofMap& dm) {
  std::vector<std::vector<std::size_t>> out(dm.mesh().n_triangles());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto nodes = dm.scalar_nodes(t);
    for (int c = 0; c < 2; ++c) {
      for (auto s : nodes) out[t].push_back(dm.velocity_dof(c, s));
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> pressure_lists(const DofMap& dm) {
  std::vector<std::vector<std::size_t>> out(dm.mesh().n_triangles());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto p = dm.pressure_nodes(t);
    out[t].assign(p.begin(), p.end());
  }
  return out;
}

// Physical quadrature weight: reference weight times the Jacobian 2|T|.
double physical_weight(const QuadraturePoint& qp, const P2Element& el) {
  return qp.weight * 2.0 * el.area();
}

// Divergence of the 12 local velocity basis functions [x-comp..., y-comp...].
std::array<double, 12> basis_divergence(const std::array<Vec2, 6>& g) {
  std::array<double, 12> d{};
  for (int i = 0; i < 6; ++i) {
    d[i] = g[i].x;
    d[6 + i] = g[i].y;
  }
  return d;
}

}  // namespace

TaylorHoodScatter::TaylorHoodScatter(const DofMap& dm)
    : velocity(dm.n_velocity(), dm.n_velocity(), velocity_lists(dm), velocity_lists(dm)),
      pressure(dm.n_pressure(), dm.n_pressure(), pressure_lists(dm), pressure_lists(dm)),
      pressure_velocity(dm.n_pressure(), dm.n_velocity(), pressure_lists(dm),
                        velocity_lists(dm)) {}

SparseMatrix assemble_velocity_mass(const DofMap& dm, const TaylorHoodScatter& sc) {
  const auto& rule = degree5_rule();
  return sc.velocity.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto phi = el.p2_values(qp.barycentric);
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) local[(c * 6 + i) * 12 + c * 6 + j] += jw * phi[i] * phi[j];
        }
      }
    }
  });
}

SparseMatrix assemble_stiffness(const DofMap& dm, const TaylorHoodScatter& sc) {
  const auto& rule = degree5_rule();
  return sc.velocity.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto g = el.p2_gradients(qp.barycentric);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          const double v = jw * (g[i].x * g[j].x + g[i].y * g[j].y);
          local[i * 12 + j] += v;
          local[(6 + i) * 12 + 6 + j] += v;
        }
      }
    }
  });
}

SparseMatrix assemble_divergence(const DofMap& dm, const TaylorHoodScatter& sc) {
  const auto& rule = degree5_rule();
  return sc.pressure_velocity.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto d = basis_divergence(el.p2_gradients(qp.barycentric));
      for (int q = 0; q < 3; ++q) {
        const double psi = qp.barycentric[q];
        for (int b = 0; b < 12; ++b) local[q * 12 + b] += jw * psi * d[b];
      }
    }
  });
}

SparseMatrix assemble_graddiv(const DofMap& dm, const TaylorHoodScatter& sc) {
  const auto& rule = degree5_rule();
  return sc.velocity.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto d = basis_divergence(el.p2_gradients(qp.barycentric));
      for (int a = 0; a < 12; ++a) {
        for (int b = 0; b < 12; ++b) local[a * 12 + b] += jw * d[a] * d[b];
      }
    }
  });
}

SparseMatrix assemble_pressure_mass(const DofMap& dm, const TaylorHoodScatter& sc) {
  const auto& rule = degree5_rule();
  return sc.pressure.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto& l = qp.barycentric;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) local[i * 3 + j] += jw * l[i] * l[j];
      }
    }
  });
}

SparseMatrix assemble_pressure_stiffness(const DofMap& dm, const TaylorHoodScatter& sc) {
  return sc.pressure.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    const auto& g = el.p1_gradients();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) local[i * 3 + j] = el.area() * (g[i].x * g[j].x + g[i].y * g[j].y);
    }
  });
}

SparseMatrix assemble_convection(const DofMap& dm, const TaylorHoodScatter& sc,
                                 std::span<const double> w) {
  if (w.size() != dm.n_velocity()) {
    throw std::invalid_argument("assemble_convection: transport field has wrong size");
  }
  const auto& rule = degree5_rule();
  return sc.velocity.assemble([&](std::size_t t, std::span<double> local) {
    const P2Element el(dm.mesh(), t);
    const auto nodes = dm.scalar_nodes(t);
    std::array<double, 6> wx{}, wy{};
    for (int i = 0; i < 6; ++i) {
      wx[i] = w[dm.velocity_dof(0, nodes[i])];
      wy[i] = w[dm.velocity_dof(1, nodes[i])];
    }
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto phi = el.p2_values(qp.barycentric);
      const auto g = el.p2_gradients(qp.barycentric);
      double ux = 0.0, uy = 0.0, div = 0.0;
      for (int i = 0; i < 6; ++i) {
        ux += wx[i] * phi[i];
        uy += wy[i] * phi[i];
        div += wx[i] * g[i].x + wy[i] * g[i].y;
      }
      for (int i = 0; i < 6; ++i) {    // test function
        for (int j = 0; j < 6; ++j) {  // trial function
          const double v =
              jw * ((ux * g[j].x + uy * g[j].y) * phi[i] + 0.5 * div * phi[j] * phi[i]);
          local[i * 12 + j] += v;
          local[(6 + i) * 12 + 6 + j] += v;
        }
      }
    }
  });
}

Vector assemble_load(const DofMap& dm, const VectorField& f, double t) {
  const auto& rule = degree5_rule();
  Vector out(dm.n_velocity(), 0.0);
  for (std::size_t tri = 0; tri < dm.mesh().n_triangles(); ++tri) {
    const P2Element el(dm.mesh(), tri);
    const auto nodes = dm.scalar_nodes(tri);
    for (const auto& qp : rule.points) {
      const double jw = physical_weight(qp, el);
      const auto p = el.map(qp.barycentric);
      const auto fv = f(p.x, p.y, t);
      const auto phi = el.p2_values(qp.barycentric);
      for (int i = 0; i < 6; ++i) {
        out[dm.velocity_dof(0, nodes[i])] += jw * fv.x * phi[i];
        out[dm.velocity_dof(1, nodes[i])] += jw * fv.y * phi[i];
      }
    }
  }
  return out;
}

SparseMatrix assemble_velocity_mass(const DofMap& dm) {
  return assemble_velocity_mass(dm, TaylorHoodScatter(dm));
}
SparseMatrix assemble_stiffness(const DofMap& dm) { return assemble_stiffness(dm, TaylorHoodScatter(dm)); }
SparseMatrix assemble_divergence(const DofMap& dm) {
  return assemble_divergence(dm, TaylorHoodScatter(dm));
}
SparseMatrix assemble_graddiv(const DofMap& dm) { return assemble_graddiv(dm, TaylorHoodScatter(dm)); }
SparseMatrix assemble_pressure_mass(const DofMap& dm) {
  return assemble_pressure_mass(dm, TaylorHoodScatter(dm));
}
SparseMatrix assemble_convection(const DofMap& dm, std::span<const double> w) {
  return assemble_convection(dm, TaylorHoodScatter(dm), w);
}

Vector interpolate_velocity(const DofMap& dm, const VectorField& g, double t) {
  Vector out(dm.n_velocity());
  for (std::size_t s = 0; s < dm.n_velocity_scalar(); ++s) {
    const auto& p = dm.node(s);
    const auto v = g(p.x, p.y, t);
    out[dm.velocity_dof(0, s)] = v.x;
    out[dm.velocity_dof(1, s)] = v.y;
  }
  return out;
}

Vector interpolate_pressure(const DofMap& dm, const ScalarField& g, double t) {
  Vector out(dm.n_pressure());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& p = dm.mesh().vertices()[i];
    out[i] = g(p.x, p.y, t);
  }
  return out;
}

Vector project_pressure(const SparseMatrix& pressure_mass, std::span<const double> rhs,
                        double tol) {
  return solve_spd(pressure_mass, rhs, tol).x;
}

}  // namespace hybridns

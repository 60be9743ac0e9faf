#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hybridns/diagnostics.hpp"

namespace hybridns {

double l2_norm(std::span<const double> c, const SparseMatrix& mass) {
  return std::sqrt(std::max(0.0, quadratic_form(mass, c, c)));
}

namespace {

// Calls visit(jw, element, bary, t) for every quadrature point.
template <typename Visit>
void for_each_point(const DofMap& dm, Visit&& visit) {
  const auto& rule = degree5_rule();
  for (std::size_t t = 0; t < dm.mesh().n_triangles(); ++t) {
    const P2Element el(dm.mesh(), t);
    for (const auto& qp : rule.points) {
      visit(qp.weight * 2.0 * el.area(), el, qp.barycentric, t);
    }
  }
}

double divergence_at(const DofMap& dm, const P2Element& el, std::size_t t,
                     const std::array<double, 3>& bary, std::span<const double> w) {
  const auto nodes = dm.scalar_nodes(t);
  const auto g = el.p2_gradients(bary);
  double div = 0.0;
  for (int i = 0; i < 6; ++i) {
    div += w[dm.velocity_dof(0, nodes[i])] * g[i].x + w[dm.velocity_dof(1, nodes[i])] * g[i].y;
  }
  return div;
}

double pressure_at(const DofMap& dm, std::size_t t, const std::array<double, 3>& bary,
                   std::span<const double> lambda) {
  const auto p = dm.pressure_nodes(t);
  return bary[0] * lambda[p[0]] + bary[1] * lambda[p[1]] + bary[2] * lambda[p[2]];
}

void check_velocity(const DofMap& dm, std::span<const double> w, const char* who) {
  if (w.size() != dm.n_velocity()) {
    throw std::invalid_argument(std::string(who) + ": velocity vector has wrong size");
  }
}

void check_pressure(const DofMap& dm, std::span<const double> l, const char* who) {
  if (l.size() != dm.n_pressure()) {
    throw std::invalid_argument(std::string(who) + ": pressure vector has wrong size");
  }
}

}  // namespace

double div_norm(const DofMap& dm, std::span<const double> w) {
  check_velocity(dm, w, "div_norm");
  double sum = 0.0;
  for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
    const double d = divergence_at(dm, el, t, bary, w);
    sum += jw * d * d;
  });
  return std::sqrt(sum);
}

double div_integral(const DofMap& dm, std::span<const double> w) {
  check_velocity(dm, w, "div_integral");
  double sum = 0.0;
  for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
    sum += jw * divergence_at(dm, el, t, bary, w);
  });
  return sum;
}

double min_x_velocity(const DofMap& dm, std::span<const double> w, Interval x_range,
                      double y_max) {
  check_velocity(dm, w, "min_x_velocity");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dm.n_velocity_scalar(); ++i) {
    const Point2& p = dm.node(i);
    if (p.x >= x_range.lo && p.x <= x_range.hi && p.y < y_max) m = std::min(m, w[i]);
  }
  return m;
}

double discrete_curvature(std::span<const double> l0, std::span<const double> l1,
                          std::span<const double> l2, const SparseMatrix& mp) {
  if (l0.size() != l1.size() || l1.size() != l2.size() || l2.size() != mp.rows()) {
    throw std::invalid_argument("discrete_curvature: size mismatch");
  }
  Vector d(l0.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = l2[i] - 2.0 * l1[i] + l0[i];
  return l2_norm(d, mp);
}

double discrete_curvature_direct(const DofMap& dm, std::span<const double> lambda0,
                                 std::span<const double> lambda1,
                                 std::span<const double> lambda2, std::span<const double> w0,
                                 std::span<const double> w1, std::span<const double> w2,
                                 double beta) {
  for (auto l : {lambda0, lambda1, lambda2}) check_pressure(dm, l, "discrete_curvature_direct");
  for (auto w : {w0, w1, w2}) check_velocity(dm, w, "discrete_curvature_direct");
  Vector dl(lambda0.size()), dw(w0.size());
  for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = lambda2[i] - 2.0 * lambda1[i] + lambda0[i];
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = w2[i] - 2.0 * w1[i] + w0[i];
  double sum = 0.0;
  for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
    const double v = pressure_at(dm, t, bary, dl) + 2.0 * beta * divergence_at(dm, el, t, bary, dw);
    sum += jw * v * v;
  });
  return std::sqrt(sum);
}

double velocity_error_l2(const DofMap& dm, std::span<const double> w, const VectorField& u,
                         double time) {
  check_velocity(dm, w, "velocity_error_l2");
  double sum = 0.0;
  for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
    const auto nodes = dm.scalar_nodes(t);
    const auto phi = el.p2_values(bary);
    double ux = 0.0, uy = 0.0;
    for (int i = 0; i < 6; ++i) {
      ux += w[dm.velocity_dof(0, nodes[i])] * phi[i];
      uy += w[dm.velocity_dof(1, nodes[i])] * phi[i];
    }
    const auto p = el.map(bary);
    const auto ex = u(p.x, p.y, time);
    sum += jw * ((ux - ex.x) * (ux - ex.x) + (uy - ex.y) * (uy - ex.y));
  });
  return std::sqrt(sum);
}

double pressure_error_l2(const DofMap& dm, std::span<const double> lambda, const ScalarField& p,
                         double time, bool remove_means) {
  check_pressure(dm, lambda, "pressure_error_l2");
  double area = 0.0, mean_h = 0.0, mean_e = 0.0;
  if (remove_means) {
    for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
      const auto x = el.map(bary);
      area += jw;
      mean_h += jw * pressure_at(dm, t, bary, lambda);
      mean_e += jw * p(x.x, x.y, time);
    });
    mean_h /= area;
    mean_e /= area;
  }
  double sum = 0.0;
  for_each_point(dm, [&](double jw, const P2Element& el, const auto& bary, std::size_t t) {
    const auto x = el.map(bary);
    const double d = (pressure_at(dm, t, bary, lambda) - mean_h) - (p(x.x, x.y, time) - mean_e);
    sum += jw * d * d;
  });
  return std::sqrt(sum);
}

double spacetime_l2(std::span<const double> norms, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("spacetime_l2: dt must be positive");
  if (norms.size() < 2) throw std::invalid_argument("spacetime_l2: need at least two samples");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
    sum += 0.5 * dt * (norms[i] * norms[i] + norms[i + 1] * norms[i + 1]);
  }
  return std::sqrt(sum);
}

std::vector<double> convergence_rates(std::span<const double> errors,
                                      std::span<const double> dts) {
  if (errors.size() != dts.size()) throw std::invalid_argument("convergence_rates: size mismatch");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (std::abs(dts[i] / dts[i + 1] - 2.0) > 1e-12) {
      throw std::invalid_argument("convergence_rates: time steps must halve");
    }
    if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0)) {
      throw std::invalid_argument("convergence_rates: errors must be positive");
    }
    rates.push_back(std::log2(errors[i] / errors[i + 1]));
  }
  return rates;
}

}  // namespace hybridns

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hybridns/fespace.hpp"

namespace hybridns {

/// sqrt(c^T M c).
double l2_norm(std::span<const double> c, const SparseMatrix& mass);

/// ||div w_h|| by elementwise quadrature (no projection).
double div_norm(const DofMap& dofmap, std::span<const double> w);

/// int div w_h over the domain (equals the boundary flux of w_h).
double div_integral(const DofMap& dofmap, std::span<const double> w);

/// Smallest x-velocity over the velocity nodes in x_range with y < y_max;
/// +inf when no node lies in the region.
double min_x_velocity(const DofMap& dofmap, std::span<const double> w, Interval x_range,
                      double y_max);

/// ||l2 - 2 l1 + l0|| in the pressure mass norm; l0 is the oldest level.
double discrete_curvature(std::span<const double> l0, std::span<const double> l1,
                          std::span<const double> l2, const SparseMatrix& pressure_mass);

/// Curvature of lambda + 2 beta div w_h evaluated by quadrature, without
/// projecting div w_h onto the pressure space.
double discrete_curvature_direct(const DofMap& dofmap, std::span<const double> lambda0,
                                 std::span<const double> lambda1,
                                 std::span<const double> lambda2, std::span<const double> w0,
                                 std::span<const double> w1, std::span<const double> w2,
                                 double beta);

/// ||u_h - u(t)|| by quadrature.
double velocity_error_l2(const DofMap& dofmap, std::span<const double> w, const VectorField& u,
                         double t);

/// ||(lambda_h - mean) - (p(t) - mean)|| by quadrature; both means are removed
/// when `remove_means` is set.
double pressure_error_l2(const DofMap& dofmap, std::span<const double> lambda,
                         const ScalarField& p, double t, bool remove_means);

/// Composite trapezoidal rule over squared spatial norms sampled every dt,
/// then the square root.
double spacetime_l2(std::span<const double> spatial_norms, double dt);

/// rate_i = log2(e_i / e_{i+1}); dts must halve exactly.
std::vector<double> convergence_rates(std::span<const double> errors,
                                      std::span<const double> dts);

struct TimeSeriesRecord {
  double t = 0.0;
  double norm_w = 0.0;
  double norm_grad_w = 0.0;
  double norm_div_w = 0.0;
  double norm_lambda = 0.0;
  std::optional<double> kappa;
  std::optional<double> energy_residual;
  std::size_t solver_iterations = 0;
};

inline constexpr const char* kTimeSeriesHeader =
    "t,norm_w,norm_grad_w,norm_div_w,norm_lambda,kappa,energy_residual,solver_iterations";

/// Thrown on file-system failures; the message names the path.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scientific notation with 17 significant digits, locale independent.
std::string format_number(double v);

void write_csv(const std::vector<TimeSeriesRecord>& series, const std::string& path);
std::vector<TimeSeriesRecord> read_csv(const std::string& path);

/// Generic CSV table with a header row; empty optionals become empty cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;
};
void write_table(const CsvTable& table, const std::string& path);
/// Reads any CSV written by write_table or write_csv.
CsvTable read_table(const std::string& path);
/// Column by header name; throws OutputError naming a missing column.
std::vector<std::optional<double>> column(const CsvTable& table, const std::string& name);

/// Legacy VTK 2.0 ASCII unstructured grid: velocity at the vertices (the
/// vertex values of the P2 field) and pressure.
void write_vtk_snapshot(const TriMesh& mesh, const DofMap& dofmap, std::span<const double> w,
                        std::span<const double> lambda, const std::string& path);

}  // namespace hybridns

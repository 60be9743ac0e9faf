#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hybridns/diagnostics.hpp"

namespace hybridns {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw OutputError("write failed: " + path);
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw OutputError(path + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_csv(const std::vector<TimeSeriesRecord>& series, const std::string& path) {
  auto out = open_for_write(path);
  out << kTimeSeriesHeader << '\n';
  for (const auto& r : series) {
    out << format_number(r.t) << ',' << format_number(r.norm_w) << ','
        << format_number(r.norm_grad_w) << ',' << format_number(r.norm_div_w) << ','
        << format_number(r.norm_lambda) << ',' << cell(r.kappa) << ',' << cell(r.energy_residual)
        << ',' << r.solver_iterations << '\n';
  }
  finish(out, path);
}

std::vector<TimeSeriesRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTimeSeriesHeader) {
    throw OutputError(path + ": unexpected header");
  }
  std::vector<TimeSeriesRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw OutputError(path + ": expected 8 fields, got " + std::to_string(f.size()));
    TimeSeriesRecord r;
    r.t = parse_double(f[0], path);
    r.norm_w = parse_double(f[1], path);
    r.norm_grad_w = parse_double(f[2], path);
    r.norm_div_w = parse_double(f[3], path);
    r.norm_lambda = parse_double(f[4], path);
    if (!f[5].empty()) r.kappa = parse_double(f[5], path);
    if (!f[6].empty()) r.energy_residual = parse_double(f[6], path);
    r.solver_iterations = static_cast<std::size_t>(parse_double(f[7], path));
    out.push_back(r);
  }
  return out;
}

void write_table(const CsvTable& table, const std::string& path) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("write_table: row width differs from header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell(row[i]);
    out << '\n';
  }
  finish(out, path);
}

CsvTable read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw OutputError(path + ": missing header");
  CsvTable table{split(line), {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != table.header.size()) {
      throw OutputError(path + ": expected " + std::to_string(table.header.size()) +
                        " fields, got " + std::to_string(f.size()));
    }
    std::vector<std::optional<double>> row;
    for (const auto& x : f) {
      if (x.empty()) row.emplace_back();
      else row.emplace_back(parse_double(x, path));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::optional<double>> column(const CsvTable& table, const std::string& name) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw OutputError("missing column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - table.header.begin());
  std::vector<std::optional<double>> out;
  for (const auto& r : table.rows) out.push_back(r[k]);
  return out;
}

void write_vtk_snapshot(const TriMesh& mesh, const DofMap& dm, std::span<const double> w,
                        std::span<const double> lambda, const std::string& path) {
  if (w.size() != dm.n_velocity() || lambda.size() != dm.n_pressure()) {
    throw std::invalid_argument("write_vtk_snapshot: field sizes do not match the mesh");
  }
  auto out = open_for_write(path);
  const std::size_t nv = mesh.n_vertices();
  const std::size_t nt = mesh.n_triangles();
  out << "# vtk DataFile Version 2.0\n"
      << "hybridns snapshot\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices()) {
    out << format_number(p.x) << ' ' << format_number(p.y) << " 0\n";
  }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t i = 0; i < nt; ++i) out << "5\n";
  out << "POINT_DATA " << nv << '\n';
  out << "VECTORS velocity double\n";
  for (std::size_t i = 0; i < nv; ++i) {
    // Vertex nodes come first in the scalar numbering.
    out << format_number(w[dm.velocity_dof(0, i)]) << ' ' << format_number(w[dm.velocity_dof(1, i)])
        << " 0\n";
  }
  out << "SCALARS pressure double 1\n"
      << "LOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nv; ++i) out << format_number(lambda[i]) << '\n';
  finish(out, path);
}

}  // namespace hybridns

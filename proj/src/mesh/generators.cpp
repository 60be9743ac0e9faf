#include <cmath>
#include <map>

#include "hybridns/mesh.hpp"

namespace hybridns {

namespace {

constexpr double kChannelLength = 40.0;
constexpr double kChannelHeight = 10.0;

void check_interval(const Interval& r, const char* name) {
  if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw std::invalid_argument(std::string("degenerate interval for ") + name);
  }
}

// Cell (i, j) -> two CCW triangles split along (i,j)-(i+1,j+1).
void split_cell(std::size_t v00, std::size_t v10, std::size_t v01, std::size_t v11,
                std::vector<Triangle>& out) {
  out.push_back({v00, v10, v11});
  out.push_back({v00, v11, v01});
}

// Integer grid position of `value` on a grid of `n` cells over [0, length].
std::size_t aligned_index(double value, std::size_t n, double length, const char* what) {
  const double pos = value * static_cast<double>(n) / length;
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-9 || rounded < 0.0 || rounded > static_cast<double>(n)) {
    throw std::invalid_argument(std::string("channel step ") + what +
                                " does not align with the cell grid");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

TriMesh generate_rect_mesh(Interval x_range, Interval y_range, std::size_t nx, std::size_t ny) {
  check_interval(x_range, "x");
  check_interval(y_range, "y");
  if (nx == 0 || ny == 0) throw std::invalid_argument("generate_rect_mesh: nx, ny must be >= 1");
  const auto vid = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<Point2> verts;
  verts.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      // Endpoints are set exactly so boundary filters can compare coordinates.
      const double x = i == nx ? x_range.hi
                               : x_range.lo + (x_range.hi - x_range.lo) * static_cast<double>(i) /
                                                  static_cast<double>(nx);
      const double y = j == ny ? y_range.hi
                               : y_range.lo + (y_range.hi - y_range.lo) * static_cast<double>(j) /
                                                  static_cast<double>(ny);
      verts.push_back({x, y});
    }
  }
  std::vector<Triangle> tris;
  tris.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      split_cell(vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1), tris);
    }
  }
  std::vector<BoundaryEdge> bnd;
  for (std::size_t i = 0; i < nx; ++i) bnd.push_back({{vid(i, 0), vid(i + 1, 0)}, 1});
  for (std::size_t j = 0; j < ny; ++j) bnd.push_back({{vid(nx, j), vid(nx, j + 1)}, 2});
  for (std::size_t i = nx; i-- > 0;) bnd.push_back({{vid(i + 1, ny), vid(i, ny)}, 3});
  for (std::size_t j = ny; j-- > 0;) bnd.push_back({{vid(0, j + 1), vid(0, j)}, 4});
  return TriMesh(std::move(verts), std::move(tris), std::move(bnd));
}

TriMesh generate_channel_step_mesh(std::size_t nx, std::size_t ny, StepFootprint step) {
  if (nx == 0 || ny == 0) {
    throw std::invalid_argument("generate_channel_step_mesh: nx, ny must be >= 1");
  }
  if (!(step.x1 > step.x0) || !(step.y1 > step.y0) || step.x0 <= 0.0 ||
      step.x1 >= kChannelLength || step.y0 != 0.0 || step.y1 >= kChannelHeight) {
    throw std::invalid_argument("generate_channel_step_mesh: step footprint outside channel");
  }
  const std::size_t i0 = aligned_index(step.x0, nx, kChannelLength, "x0");
  const std::size_t i1 = aligned_index(step.x1, nx, kChannelLength, "x1");
  const std::size_t j1 = aligned_index(step.y1, ny, kChannelHeight, "y1");
  const auto in_step = [&](std::size_t i, std::size_t j) { return i >= i0 && i < i1 && j < j1; };

  const auto grid_id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<std::size_t> remap((nx + 1) * (ny + 1), static_cast<std::size_t>(-1));
  std::vector<Point2> verts;
  const auto vertex = [&](std::size_t i, std::size_t j) {
    auto& slot = remap[grid_id(i, j)];
    if (slot == static_cast<std::size_t>(-1)) {
      slot = verts.size();
      verts.push_back({kChannelLength * static_cast<double>(i) / static_cast<double>(nx),
                       kChannelHeight * static_cast<double>(j) / static_cast<double>(ny)});
    }
    return slot;
  };
  std::vector<Triangle> tris;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (in_step(i, j)) continue;
      const auto v00 = vertex(i, j);
      const auto v10 = vertex(i + 1, j);
      const auto v01 = vertex(i, j + 1);
      const auto v11 = vertex(i + 1, j + 1);
      split_cell(v00, v10, v01, v11, tris);
    }
  }

  // Boundary = edges with a single adjacent triangle.
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      const auto a = std::min(t[k], t[(k + 1) % 3]);
      const auto b = std::max(t[k], t[(k + 1) % 3]);
      ++count[{a, b}];
    }
  }
  std::vector<BoundaryEdge> bnd;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k];
      const auto b = t[(k + 1) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] != 1) continue;
      const auto& pa = verts[a];
      const auto& pb = verts[b];
      int tag = 1;
      if (pa.x == 0.0 && pb.x == 0.0) {
        tag = 4;
      } else if (pa.x == kChannelLength && pb.x == kChannelLength) {
        tag = 2;
      } else if (pa.y == kChannelHeight && pb.y == kChannelHeight) {
        tag = 3;
      }
      bnd.push_back({{a, b}, tag});
    }
  }
  return TriMesh(std::move(verts), std::move(tris), std::move(bnd));
}

}  // namespace hybridns

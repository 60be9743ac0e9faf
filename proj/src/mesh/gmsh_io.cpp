#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hybridns/mesh.hpp"

namespace hybridns {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line (trailing CR/whitespace stripped); false on EOF.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
        line.pop_back();
      }
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      line.erase(0, start);
      return true;
    }
    return false;
  }

  std::string expect_line(const char* context) {
    std::string line;
    if (!next(line)) fail(std::string("unexpected end of file in ") + context);
    return line;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw MeshParseError(line_no_ == 0 ? 1 : line_no_, message);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

long long to_int(const LineReader& r, const std::string& tok, const char* what) {
  long long v = 0;
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) r.fail(std::string("invalid integer for ") + what);
  return v;
}

double to_double(const LineReader& r, const std::string& tok, const char* what) {
  // strtod is locale-dependent in principle; the "C" locale is the default.
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
    r.fail(std::string("invalid number for ") + what);
  }
  return v;
}

std::size_t read_count(LineReader& r, const char* section) {
  const auto toks = split(r.expect_line(section));
  if (toks.size() != 1) r.fail(std::string(section) + ": expected an entry count");
  const auto n = to_int(r, toks[0], section);
  if (n < 0) r.fail(std::string(section) + ": negative entry count");
  return static_cast<std::size_t>(n);
}

// Skips an unknown section up to its $End marker.
void skip_section(LineReader& r, const std::string& name) {
  const std::string end = "$End" + name.substr(1);
  std::string line;
  while (r.next(line)) {
    if (line == end) return;
  }
  r.fail("missing " + end);
}

bool is_two_dimensional(long long type) {
  switch (type) {
    case 2: case 3: case 9: case 10: case 16: case 20: case 21: case 22: case 23: case 24:
    case 25:
      return true;
    default:
      return false;
  }
}

}  // namespace

TriMesh parse_gmsh(std::istream& in) {
  LineReader r(in);
  std::string line;
  if (!r.next(line) || line != "$MeshFormat") r.fail("expected $MeshFormat header");
  {
    const auto toks = split(r.expect_line("$MeshFormat"));
    if (toks.size() != 3 || toks[0] != "2.2" || toks[1] != "0") {
      r.fail("$MeshFormat: only ASCII version 2.2 is supported");
    }
    if (r.expect_line("$MeshFormat") != "$EndMeshFormat") r.fail("expected $EndMeshFormat");
  }

  std::map<long long, Point2> nodes;
  std::vector<long long> node_order;
  struct RawLine { long long a, b; int tag; std::size_t line; };
  std::vector<RawLine> lines;
  struct RawTri { long long a, b, c; std::size_t line; };
  std::vector<RawTri> tris;
  bool have_nodes = false;
  bool have_elements = false;

  while (r.next(line)) {
    if (line == "$Nodes") {
      if (have_nodes) r.fail("duplicate $Nodes section");
      have_nodes = true;
      const std::size_t n = read_count(r, "$Nodes");
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = r.expect_line("$Nodes");
        if (row == "$EndNodes") {
          r.fail("$Nodes: expected " + std::to_string(n) + " entries, found " + std::to_string(i));
        }
        const auto toks = split(row);
        if (toks.size() != 4) r.fail("$Nodes: expected 'id x y z'");
        const auto id = to_int(r, toks[0], "node id");
        if (nodes.count(id)) r.fail("$Nodes: duplicate node id " + toks[0]);
        nodes[id] = {to_double(r, toks[1], "x"), to_double(r, toks[2], "y")};
        node_order.push_back(id);
      }
      if (r.expect_line("$Nodes") != "$EndNodes") {
        r.fail("$Nodes: entry count mismatch (expected $EndNodes after " + std::to_string(n) +
               " entries)");
      }
    } else if (line == "$Elements") {
      if (have_elements) r.fail("duplicate $Elements section");
      have_elements = true;
      const std::size_t n = read_count(r, "$Elements");
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = r.expect_line("$Elements");
        if (row == "$EndElements") {
          r.fail("$Elements: expected " + std::to_string(n) + " entries, found " +
                 std::to_string(i));
        }
        const auto toks = split(row);
        if (toks.size() < 3) r.fail("$Elements: truncated element record");
        const auto type = to_int(r, toks[1], "element type");
        const auto ntags = to_int(r, toks[2], "tag count");
        if (ntags < 0 || toks.size() < 3 + static_cast<std::size_t>(ntags)) {
          r.fail("$Elements: bad tag count");
        }
        const std::size_t first_node = 3 + static_cast<std::size_t>(ntags);
        const std::size_t n_nodes = toks.size() - first_node;
        auto node_at = [&](std::size_t k) { return to_int(r, toks[first_node + k], "node id"); };
        if (type == 15) {
          continue;  // geometry points carry no mesh information
        } else if (type == 1) {
          if (n_nodes != 2) r.fail("$Elements: line element needs 2 nodes");
          if (ntags < 1) r.fail("$Elements: line element without physical tag");
          const auto tag = to_int(r, toks[3], "physical tag");
          lines.push_back({node_at(0), node_at(1), static_cast<int>(tag), r.line_no()});
        } else if (type == 2) {
          if (n_nodes != 3) r.fail("$Elements: triangle needs 3 nodes");
          tris.push_back({node_at(0), node_at(1), node_at(2), r.line_no()});
        } else if (is_two_dimensional(type)) {
          r.fail("$Elements: non-triangle 2D element type " + toks[1]);
        } else {
          r.fail("$Elements: unsupported element type " + toks[1]);
        }
      }
      if (r.expect_line("$Elements") != "$EndElements") {
        r.fail("$Elements: entry count mismatch (expected $EndElements after " +
               std::to_string(n) + " entries)");
      }
    } else if (!line.empty() && line[0] == '$') {
      skip_section(r, line);
    } else {
      r.fail("unexpected content outside a section");
    }
  }
  if (!have_nodes) r.fail("missing $Nodes section");
  if (!have_elements) r.fail("missing $Elements section");
  if (tris.empty()) r.fail("no triangles in $Elements");

  std::map<long long, std::size_t> used;
  for (const auto& t : tris) {
    for (auto id : {t.a, t.b, t.c}) {
      if (!nodes.count(id)) throw MeshParseError(t.line, "triangle references unknown node");
      used[id] = 0;
    }
  }
  std::vector<Point2> verts;
  for (auto id : node_order) {
    if (auto it = used.find(id); it != used.end()) {
      it->second = verts.size();
      verts.push_back(nodes[id]);
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(tris.size());
  for (const auto& t : tris) {
    Triangle tri{used[t.a], used[t.b], used[t.c]};
    const double area = signed_area(verts[tri[0]], verts[tri[1]], verts[tri[2]]);
    if (area == 0.0) throw MeshParseError(t.line, "degenerate triangle");
    if (area < 0.0) std::swap(tri[1], tri[2]);
    triangles.push_back(tri);
  }
  std::vector<BoundaryEdge> bnd;
  for (const auto& l : lines) {
    const auto ia = used.find(l.a);
    const auto ib = used.find(l.b);
    if (ia == used.end() || ib == used.end()) {
      throw MeshParseError(l.line, "boundary line references a node outside the triangulation");
    }
    bnd.push_back({{ia->second, ib->second}, l.tag});
  }
  try {
    return TriMesh(std::move(verts), std::move(triangles), std::move(bnd));
  } catch (const std::invalid_argument& e) {
    throw MeshParseError(r.line_no(), std::string("invalid mesh: ") + e.what());
  }
}

TriMesh read_gmsh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  try {
    return parse_gmsh(in);
  } catch (const MeshParseError& e) {
    throw MeshParseError(e.line(), path + ": " + e.what());
  }
}

void write_gmsh(const TriMesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.n_vertices() << "\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    out << i + 1 << ' ' << mesh.vertices()[i].x << ' ' << mesh.vertices()[i].y << " 0\n";
  }
  out << "$EndNodes\n$Elements\n" << mesh.boundary_edges().size() + mesh.n_triangles() << "\n";
  std::size_t id = 1;
  for (const auto& be : mesh.boundary_edges()) {
    out << id++ << " 1 2 " << be.tag << ' ' << be.tag << ' ' << be.vertices[0] + 1 << ' '
        << be.vertices[1] + 1 << "\n";
  }
  for (const auto& t : mesh.triangles()) {
    out << id++ << " 2 2 0 1 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
  }
  out << "$EndElements\n";
}

}  // namespace hybridns

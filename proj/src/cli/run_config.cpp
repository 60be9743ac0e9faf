#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hybridns/cli.hpp"

namespace hybridns {

using nlohmann::json;

const char* to_string(ParameterCoupling c) {
  switch (c) {
    case ParameterCoupling::explicit_values: return "explicit";
    case ParameterCoupling::reciprocal_dt: return "reciprocal_dt";
    case ParameterCoupling::reciprocal_dt2: return "reciprocal_dt2";
    case ParameterCoupling::proportional_dt: return "proportional_dt";
    case ParameterCoupling::method_default: return "method_default";
  }
  return "unknown";
}

ParameterCoupling coupling_from_string(const std::string& name) {
  for (auto c : {ParameterCoupling::explicit_values, ParameterCoupling::reciprocal_dt,
                 ParameterCoupling::reciprocal_dt2, ParameterCoupling::proportional_dt,
                 ParameterCoupling::method_default}) {
    if (name == to_string(c)) return c;
  }
  throw ConfigError("unknown parameter_coupling: " + name);
}

void apply_coupling(ParameterCoupling coupling, SchemeConfig& config) {
  const double k = config.dt;
  double v = 0.0;
  switch (coupling) {
    case ParameterCoupling::explicit_values: return;
    case ParameterCoupling::reciprocal_dt: v = 1.0 / k; break;
    case ParameterCoupling::reciprocal_dt2: v = 1.0 / (k * k); break;
    case ParameterCoupling::proportional_dt: v = k; break;
    case ParameterCoupling::method_default:
      v = is_trapezoidal(config.method) ? 1.0 / (k * k) : 1.0 / k;
      break;
  }
  config.alpha2 = v;
  config.beta = v;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key: " + (where.empty() ? key : where + "." + key));
    }
  }
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + " must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(key + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + " must be a string");
  return v.get<std::string>();
}

bool flag(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key + " must be a boolean");
  return v.get<bool>();
}

Interval interval(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(key + " must be [min, max]");
  return {number(v[0], key), number(v[1], key)};
}

MeshSource parse_mesh(const json& m) {
  check_keys(m, "mesh", {"kind", "nx", "ny", "x", "y", "step", "file"});
  MeshSource s;
  const std::string kind = m.contains("kind") ? text(m["kind"], "mesh.kind") : "rectangle";
  if (kind == "rectangle") {
    s.kind = MeshSource::Kind::rectangle;
  } else if (kind == "channel_step") {
    s.kind = MeshSource::Kind::channel_step;
    s.x = {0.0, 40.0};
    s.y = {0.0, 10.0};
    s.nx = 80;
    s.ny = 20;
  } else if (kind == "asset") {
    s.kind = MeshSource::Kind::asset;
  } else {
    throw ConfigError("unknown mesh.kind: " + kind);
  }
  if (m.contains("nx")) s.nx = count(m["nx"], "mesh.nx");
  if (m.contains("ny")) s.ny = count(m["ny"], "mesh.ny");
  if (m.contains("x")) s.x = interval(m["x"], "mesh.x");
  if (m.contains("y")) s.y = interval(m["y"], "mesh.y");
  if (m.contains("step")) {
    const auto& st = m["step"];
    if (!st.is_array() || st.size() != 4) throw ConfigError("mesh.step must be [x0, x1, y0, y1]");
    s.step = {number(st[0], "mesh.step"), number(st[1], "mesh.step"), number(st[2], "mesh.step"),
              number(st[3], "mesh.step")};
  }
  if (m.contains("file")) s.asset = text(m["file"], "mesh.file");
  if (s.kind == MeshSource::Kind::asset && s.asset.empty()) {
    throw ConfigError("mesh.file is required for kind asset");
  }
  if (s.kind != MeshSource::Kind::asset && (s.nx == 0 || s.ny == 0)) {
    throw ConfigError("mesh.nx and mesh.ny must be positive");
  }
  return s;
}

RunConfig from_json(const json& j) {
  check_keys(j, "", {"problem", "mesh", "asset_dir", "scheme", "parameter_coupling", "T",
                     "output_dir", "snapshots_every", "convergence", "damping", "eigen"});
  RunConfig c;
  if (j.contains("problem")) {
    const auto& p = j["problem"];
    check_keys(p, "problem", {"name", "Re", "bc_time_frozen"});
    if (p.contains("name")) c.problem = text(p["name"], "problem.name");
    if (p.contains("Re")) c.Re = number(p["Re"], "problem.Re");
    if (p.contains("bc_time_frozen")) c.bc_time_frozen = flag(p["bc_time_frozen"], "problem.bc_time_frozen");
  }
  if (j.contains("mesh")) c.mesh = parse_mesh(j["mesh"]);
  if (j.contains("asset_dir")) c.asset_dir = text(j["asset_dir"], "asset_dir");
  if (j.contains("scheme")) {
    const auto& s = j["scheme"];
    check_keys(s, "scheme", {"method", "alpha2", "beta", "dt", "mu", "tol", "max_iter"});
    if (s.contains("method")) {
      try {
        c.scheme.method = method_from_string(text(s["method"], "scheme.method"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (s.contains("alpha2")) c.scheme.alpha2 = number(s["alpha2"], "scheme.alpha2");
    if (s.contains("beta")) c.scheme.beta = number(s["beta"], "scheme.beta");
    if (s.contains("dt")) c.dt = number(s["dt"], "scheme.dt");
    if (s.contains("mu")) c.scheme.mu = number(s["mu"], "scheme.mu");
    if (s.contains("tol")) c.scheme.tol = number(s["tol"], "scheme.tol");
    if (s.contains("max_iter")) c.scheme.max_iter = count(s["max_iter"], "scheme.max_iter");
  }
  if (j.contains("parameter_coupling")) {
    c.coupling = coupling_from_string(text(j["parameter_coupling"], "parameter_coupling"));
  }
  if (j.contains("T")) c.T = number(j["T"], "T");
  if (j.contains("output_dir")) c.output_dir = text(j["output_dir"], "output_dir");
  if (j.contains("snapshots_every")) c.snapshots_every = count(j["snapshots_every"], "snapshots_every");
  if (j.contains("convergence")) {
    const auto& cv = j["convergence"];
    check_keys(cv, "convergence", {"dts"});
    if (cv.contains("dts")) {
      if (!cv["dts"].is_array() || cv["dts"].size() < 2) {
        throw ConfigError("convergence.dts must list at least two values");
      }
      c.convergence_dts.clear();
      for (const auto& v : cv["dts"]) c.convergence_dts.push_back(number(v, "convergence.dts"));
    }
  }
  if (j.contains("damping")) {
    const auto& d = j["damping"];
    check_keys(d, "damping", {"discretization"});
    if (d.contains("discretization")) {
      const auto v = text(d["discretization"], "damping.discretization");
      if (v == "be") c.damping = DampingDiscretization::be;
      else if (v == "be_filtered") c.damping = DampingDiscretization::be_filtered;
      else if (v == "trapezoidal") c.damping = DampingDiscretization::trapezoidal;
      else throw ConfigError("unknown damping.discretization: " + v);
    }
  }
  if (j.contains("eigen")) {
    const auto& e = j["eigen"];
    check_keys(e, "eigen", {"bc"});
    if (e.contains("bc")) {
      const auto v = text(e["bc"], "eigen.bc");
      if (v == "neumann_zero_mean") c.eigen_bc = LaplacianBc::neumann_zero_mean;
      else if (v == "dirichlet") c.eigen_bc = LaplacianBc::dirichlet;
      else throw ConfigError("unknown eigen.bc: " + v);
    }
  }
  return c;
}

void validate(const RunConfig& c) {
  static const std::set<std::string> problems{"taylor_green", "manufactured", "offset_circles",
                                               "channel_step"};
  if (!c.problem.empty() && !problems.count(c.problem)) throw ConfigError("unknown problem: " + c.problem);
  if (c.Re && !(*c.Re > 0.0)) throw ConfigError("problem.Re must be positive");
  if (c.T && (!(*c.T >= 0.0) || !std::isfinite(*c.T))) throw ConfigError("T must be nonnegative");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("scheme.dt must be positive");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  for (double dt : c.convergence_dts) {
    if (!(dt > 0.0)) throw ConfigError("convergence.dts must be positive");
  }
  SchemeConfig s = c.scheme;
  if (c.dt) s.dt = *c.dt;
  apply_coupling(c.coupling, s);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }
}

// Splits "a.b.c=value" and writes value into the JSON tree.
void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("bad override key: " + path);
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::vector<std::string>& overrides) {
  json root = json::object();
  if (!json_text.empty()) {
    try {
      root = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
  }
  if (!root.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig c = from_json(root);
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_run_config("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), overrides);
}

ProblemDef problem_for(const RunConfig& c, const std::string& fallback) {
  const std::string name = c.problem.empty() ? fallback : c.problem;
  const std::size_t n = c.mesh && c.mesh->kind == MeshSource::Kind::rectangle ? c.mesh->nx : 0;
  ProblemDef p;
  if (name == "taylor_green") {
    p = taylor_green_problem(c.Re.value_or(1.0), n ? n : 16, c.bc_time_frozen);
  } else if (name == "manufactured") {
    p = manufactured_problem(n ? n : 32, c.Re.value_or(1.0));
  } else if (name == "offset_circles") {
    p = offset_circles_problem();
  } else if (name == "channel_step") {
    p = channel_step_problem();
  } else {
    throw ConfigError("unknown problem: " + name);
  }
  if (c.Re) p.Re = *c.Re;
  if (c.mesh) p.mesh = *c.mesh;
  return p;
}

SchemeConfig scheme_for(const RunConfig& c, const ProblemDef& problem, double default_dt) {
  SchemeConfig s = c.scheme;
  s.dt = c.dt.value_or(default_dt);
  s.nu = 1.0 / problem.Re;
  apply_coupling(c.coupling, s);
  return s;
}

}  // namespace hybridns

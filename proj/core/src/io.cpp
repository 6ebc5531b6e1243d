#include "pbergman/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pbergman/error.hpp"

namespace pbergman {

namespace {

using nlohmann::json;

constexpr int kArchiveVersion = 1;

cplx point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::ParseError, "vertex must be a [x, y] pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<cplx> points_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw Error(ErrorKind::ParseError, std::string("missing array '") + key + "'");
  std::vector<cplx> out;
  for (const auto& p : j[key]) out.push_back(point_from(p));
  return out;
}

std::vector<double> numbers_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw Error(ErrorKind::ParseError, std::string("missing array '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string("'") + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

double number_from(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw Error(ErrorKind::ParseError, std::string("missing number '") + key + "'");
  return j[key].get<double>();
}

json points_to(const std::vector<cplx>& pts) {
  json a = json::array();
  for (cplx z : pts) a.push_back({z.real(), z.imag()});
  return a;
}

json cell_to(const PeriodicCellSpec& s) {
  return {{"lower_vertices", points_to(s.lower_vertices)},
          {"upper_vertices", points_to(s.upper_vertices)},
          {"beta_lower", s.beta_lower},
          {"beta_upper", s.beta_upper},
          {"junction", {s.junction_low, s.junction_high}},
          {"height_bound", s.height_bound}};
}

PeriodicCellSpec cell_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "cell description must be a JSON object");
  PeriodicCellSpec s;
  s.lower_vertices = points_from(j, "lower_vertices");
  s.upper_vertices = points_from(j, "upper_vertices");
  if (s.lower_vertices.size() < 2 || s.upper_vertices.size() < 2)
    throw Error(ErrorKind::InvalidCell, "each polyline needs at least two vertices");
  s.beta_lower = j.contains("beta_lower") ? numbers_from(j, "beta_lower")
                                          : turning_exponents(s.lower_vertices, false);
  s.beta_upper = j.contains("beta_upper") ? numbers_from(j, "beta_upper")
                                          : turning_exponents(s.upper_vertices, true);
  if (j.contains("junction")) {
    const auto ab = numbers_from(j, "junction");
    if (ab.size() != 2) throw Error(ErrorKind::ParseError, "'junction' must be [a, b]");
    s.junction_low = ab[0];
    s.junction_high = ab[1];
  } else {
    s.junction_low = s.lower_vertices.back().imag();
    s.junction_high = s.upper_vertices.back().imag();
  }
  s.height_bound = number_from(j, "height_bound");
  return s;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path);
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path);
}

PeriodicCellSpec parse_cell_spec(const std::string& text) { return cell_from(parse_json(text)); }

PeriodicCellSpec load_cell_spec(const std::string& path) { return parse_cell_spec(read_text_file(path)); }

std::string cell_spec_to_json(const PeriodicCellSpec& spec) { return cell_to(spec).dump(2) + "\n"; }

std::string serialize_map_archive(const MapArchive& a) {
  const SCParams& p = a.params;
  json j = {{"format", "pbergman-sc-map"},
            {"version", kArchiveVersion},
            {"cell", cell_to(a.cell)},
            {"rho", p.rho},
            {"theta_lower", p.theta_lower},
            {"theta_upper", p.theta_upper},
            {"beta_lower", p.beta_lower},
            {"beta_upper", p.beta_upper},
            {"scale", {p.scale.real(), p.scale.imag()}},
            {"base", {p.base.real(), p.base.imag()}},
            {"q", p.q},
            {"K_trunc", p.K_trunc},
            {"residual",
             {{"max_vertex_residual", p.max_vertex_residual},
              {"iterations", p.iterations},
              {"converged", p.converged},
              {"status", p.status}}}};
  if (!a.metadata.empty()) j["metadata"] = a.metadata;
  return j.dump(2) + "\n";
}

MapArchive parse_map_archive(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object() || j.value("format", "") != "pbergman-sc-map")
    throw Error(ErrorKind::ParseError, "not a map archive");
  if (j.value("version", 0) != kArchiveVersion)
    throw Error(ErrorKind::ParseError, "unsupported archive version");
  MapArchive a;
  try {
    a.cell = cell_from(j.at("cell"));
    SCParams& p = a.params;
    p.rho = number_from(j, "rho");
    p.theta_lower = numbers_from(j, "theta_lower");
    p.theta_upper = numbers_from(j, "theta_upper");
    p.beta_lower = numbers_from(j, "beta_lower");
    p.beta_upper = numbers_from(j, "beta_upper");
    p.scale = point_from(j.at("scale"));
    p.base = point_from(j.at("base"));
    p.q = number_from(j, "q");
    p.K_trunc = j.at("K_trunc").get<int>();
    const json& r = j.at("residual");
    p.max_vertex_residual = r.at("max_vertex_residual").get<double>();
    p.iterations = r.at("iterations").get<int>();
    p.converged = r.at("converged").get<bool>();
    p.status = r.at("status").get<std::string>();
    if (j.contains("metadata")) a.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return a;
}

void save_map_archive(const MapArchive& archive, const std::string& path) {
  write_text_file(path, serialize_map_archive(archive));
}

MapArchive load_map_archive(const std::string& path) { return parse_map_archive(read_text_file(path)); }

}  // namespace pbergman

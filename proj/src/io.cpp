#include "lattice/io.hpp"

#include "lattice/encoder.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lattice::io {

using json = nlohmann::json;

const char* const kToolVersion = "lattice_codec 1.0.0";

ParseError::ParseError(const std::string& loc, const std::string& message)
    : Error(loc.empty() ? message : loc + ": " + message), location(loc), detail(message) {}

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col), what);
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path.empty() ? "(root)" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(join(path, key), "missing required field");
  return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ParseError(path, "expected a finite number");
  return x;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<int>();
}

std::string text_of(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  if (size && j.size() != *size)
    throw ParseError(path, "expected " + std::to_string(*size) + " entries, found " + std::to_string(j.size()));
  return j;
}

Vec3 vec3(const json& j, const std::string& path) {
  array(j, path, 3);
  return {number(j[0], index(path, 0)), number(j[1], index(path, 1)), number(j[2], index(path, 2))};
}

void check_version(const json& root) {
  const int v = integer(field(root, "format_version", ""), "format_version");
  if (v != kFormatVersion) throw ParseError("format_version", "unsupported version " + std::to_string(v));
}

StrutSection parse_section(const json& j, const std::string& path) {
  if (!j.is_object() || j.size() != 1) throw ParseError(path, "expected exactly one of \"circular\" or \"explicit\"");
  if (const json* c = optional_field(j, "circular")) {
    const std::string p = join(path, "circular");
    return CircularSection{number(field(*c, "radius", p), join(p, "radius"))};
  }
  if (const json* e = optional_field(j, "explicit")) {
    const std::string p = join(path, "explicit");
    return ExplicitSection{number(field(*e, "area", p), join(p, "area")),
                           number(field(*e, "second_moment", p), join(p, "second_moment")),
                           number(field(*e, "linear_density", p), join(p, "linear_density"))};
  }
  throw ParseError(path, "expected exactly one of \"circular\" or \"explicit\"");
}

Material parse_material(const json& j, const std::string& path) {
  Material m;
  m.youngs_modulus = number(field(j, "E", path), join(path, "E"));
  m.density = number(field(j, "rho", path), join(path, "rho"));
  if (const json* nu = optional_field(j, "nu")) m.poisson_ratio = number(*nu, join(path, "nu"));
  return m;
}

template <typename M>
M parse_matrix(const json& root, const std::string& key, Eigen::Index n) {
  const json& rows = array(field(root, key, ""), key, static_cast<std::size_t>(n));
  M m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string rp = index(key, static_cast<std::size_t>(i));
    const json& row = array(rows[static_cast<std::size_t>(i)], rp, static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string ep = index(rp, static_cast<std::size_t>(j));
      if constexpr (std::is_same_v<typename M::Scalar, int>)
        m(i, j) = integer(row[static_cast<std::size_t>(j)], ep);
      else
        m(i, j) = number(row[static_cast<std::size_t>(j)], ep);
    }
  }
  return m;
}

template <typename M>
std::string matrix_rows(const M& m, const std::string& indent) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ",\n" + indent + " [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) s += ", ";
      if constexpr (std::is_same_v<typename M::Scalar, int>)
        s += std::to_string(m(i, j));
      else
        s += shortest(m(i, j));
    }
    s += "]";
  }
  return s + "]";
}

}  // namespace

LatticeFile parse_lattice(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("(root)", "expected an object");
  check_version(root);
  LatticeFile file;
  if (const json* units = optional_field(root, "units")) {
    if (const json* l = optional_field(*units, "length")) file.length_unit = text_of(*l, "units.length");
    if (const json* f = optional_field(*units, "force")) file.force_unit = text_of(*f, "units.force");
  }
  UnitCell& cell = file.cell;
  cell.obb_lengths = vec3(field(root, "obb", ""), "obb");

  const json& nodes = array(field(root, "nodes", ""), "nodes");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string p = index("nodes", k);
    cell.nodes.push_back({integer(field(nodes[k], "id", p), join(p, "id")), vec3(field(nodes[k], "pos", p), join(p, "pos"))});
  }

  std::optional<StrutSection> default_section;
  std::optional<Material> default_material;
  if (const json* d = optional_field(root, "defaults")) {
    if (const json* s = optional_field(*d, "section")) default_section = parse_section(*s, "defaults.section");
    if (const json* m = optional_field(*d, "material")) default_material = parse_material(*m, "defaults.material");
  }

  const json& struts = array(field(root, "struts", ""), "struts");
  for (std::size_t k = 0; k < struts.size(); ++k) {
    const std::string p = index("struts", k);
    const json& s = struts[k];
    const int i = integer(field(s, "i", p), join(p, "i"));
    const int j = integer(field(s, "j", p), join(p, "j"));
    const json* sec = optional_field(s, "section");
    const json* mat = optional_field(s, "material");
    if (!sec && !default_section) throw ParseError(join(p, "section"), "missing required field");
    if (!mat && !default_material) throw ParseError(join(p, "material"), "missing required field");
    const StrutSection section = sec ? parse_section(*sec, join(p, "section")) : *default_section;
    const Material material = mat ? parse_material(*mat, join(p, "material")) : *default_material;
    try {
      cell.struts.push_back(encoder::make_strut(i, j, section, material));
    } catch (const DomainError& e) {
      throw ParseError(p, e.what());
    }
  }
  try {
    check_cell(cell, default_position_tolerance(cell));
  } catch (const Error& e) {
    throw ParseError("(cell)", e.what());
  }
  return file;
}

DescriptorFile parse_descriptors(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ParseError("(root)", "expected an object");
  check_version(root);
  const int n = integer(field(root, "n", ""), "n");
  if (n < 1) throw ParseError("n", "must be at least 1");
  DescriptorFile file;
  DescriptorSet& d = file.descriptors;
  d.G = parse_matrix<Matrix>(root, "G", n);
  d.D = parse_matrix<Matrix>(root, "D", n);
  d.Kt = parse_matrix<Matrix>(root, "Kt", n);
  d.Kb = parse_matrix<Matrix>(root, "Kb", n);
  d.P = parse_matrix<IntMatrix>(root, "P", n);
  if (const json* prov = optional_field(root, "provenance")) {
    if (const json* t = optional_field(*prov, "tool_version")) file.tool_version = text_of(*t, "provenance.tool_version");
    if (const json* f = optional_field(*prov, "fingerprint")) file.fingerprint = text_of(*f, "provenance.fingerprint");
  }
  try {
    check_structure(d);
  } catch (const InvalidInputError& e) {
    throw ParseError("(descriptors)", e.what());
  }
  return file;
}

std::variant<LatticeFile, DescriptorFile> parse_any(const std::string& text) {
  const json root = parse_json(text);
  if (root.is_object() && root.contains("nodes")) return parse_lattice(text);
  if (root.is_object() && root.contains("G")) return parse_descriptors(text);
  throw ParseError("(root)", "neither a lattice file (\"nodes\") nor a descriptor file (\"G\")");
}

std::string write_lattice(const LatticeFile& file) {
  const UnitCell& cell = file.cell;
  std::ostringstream out;
  out << "{\n  \"format_version\": " << file.format_version << ",\n";
  out << "  \"units\": " << json{{"length", file.length_unit}, {"force", file.force_unit}}.dump() << ",\n";
  out << "  \"obb\": [" << shortest(cell.obb_lengths[0]) << ", " << shortest(cell.obb_lengths[1]) << ", "
      << shortest(cell.obb_lengths[2]) << "],\n";
  out << "  \"nodes\": [";
  for (std::size_t k = 0; k < cell.nodes.size(); ++k) {
    const auto& p = cell.nodes[k].position;
    out << (k ? ",\n    " : "\n    ") << "{\"id\": " << cell.nodes[k].id << ", \"pos\": [" << shortest(p[0]) << ", "
        << shortest(p[1]) << ", " << shortest(p[2]) << "]}";
  }
  out << (cell.nodes.empty() ? "],\n" : "\n  ],\n");
  out << "  \"struts\": [";
  for (std::size_t k = 0; k < cell.struts.size(); ++k) {
    const Strut& s = cell.struts[k];
    json sec;
    json mat;
    if (s.spec) {
      if (const auto* c = std::get_if<CircularSection>(&s.spec->section))
        sec["circular"] = {{"radius", c->radius}};
      else {
        const auto& e = std::get<ExplicitSection>(s.spec->section);
        sec["explicit"] = {{"area", e.area}, {"second_moment", e.second_moment}, {"linear_density", e.linear_density}};
      }
      mat = {{"E", s.spec->material.youngs_modulus}, {"rho", s.spec->material.density}};
      if (s.spec->material.poisson_ratio) mat["nu"] = *s.spec->material.poisson_ratio;
    } else {
      sec["explicit"] = {{"area", s.stretch_stiffness},
                         {"second_moment", s.bend_stiffness},
                         {"linear_density", s.linear_density}};
      mat = {{"E", 1.0}, {"rho", s.linear_density / s.stretch_stiffness}};
    }
    out << (k ? ",\n    " : "\n    ") << "{\"i\": " << s.i << ", \"j\": " << s.j << ", \"section\": " << sec.dump()
        << ", \"material\": " << mat.dump() << "}";
  }
  out << (cell.struts.empty() ? "]\n" : "\n  ]\n");
  out << "}\n";
  return out.str();
}

std::string write_descriptors(const DescriptorFile& file) {
  const DescriptorSet& d = file.descriptors;
  std::ostringstream out;
  out << "{\n  \"format_version\": " << file.format_version << ",\n  \"n\": " << d.size() << ",\n";
  const std::string ind = "        ";
  out << "  \"G\": " << matrix_rows(d.G, "       ") << ",\n";
  out << "  \"D\": " << matrix_rows(d.D, "       ") << ",\n";
  out << "  \"Kt\": " << matrix_rows(d.Kt, ind) << ",\n";
  out << "  \"Kb\": " << matrix_rows(d.Kb, ind) << ",\n";
  out << "  \"P\": " << matrix_rows(d.P, "       ") << ",\n";
  out << "  \"provenance\": " << json{{"tool_version", file.tool_version}, {"fingerprint", file.fingerprint}}.dump()
      << "\n}\n";
  return out.str();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

template <typename F>
auto with_file(const std::filesystem::path& path, F&& parse) {
  const std::string text = read_text(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.location, e.detail);
  }
}

}  // namespace

LatticeFile load_lattice(const std::filesystem::path& path) { return with_file(path, parse_lattice); }
DescriptorFile load_descriptors(const std::filesystem::path& path) { return with_file(path, parse_descriptors); }
std::variant<LatticeFile, DescriptorFile> load_any(const std::filesystem::path& path) {
  return with_file(path, parse_any);
}

void save(const std::filesystem::path& path, const LatticeFile& file) { write_text(path, write_lattice(file)); }
void save(const std::filesystem::path& path, const DescriptorFile& file) { write_text(path, write_descriptors(file)); }

std::string coefficients_json(const properties::CoefficientMatrices& c) {
  auto to_json = [](const ExtendedMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m.is_omega(i, j)) row.push_back("omega");
        else row.push_back(m.value(i, j));
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::ordered_json out;
  out["C_et"] = to_json(c.stretch);
  out["C1_ef"] = to_json(c.bend1);
  out["C2_ef"] = to_json(c.bend2);
  out["C3_ef"] = to_json(c.bend3);
  return out.dump(1) + "\n";
}

namespace {

template <typename Cell>
std::string csv(Eigen::Index rows, Eigen::Index cols, Cell&& cell) {
  std::string s = "node";
  for (Eigen::Index j = 0; j < cols; ++j) s += "," + std::to_string(j + 1);
  s += "\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    s += std::to_string(i + 1);
    for (Eigen::Index j = 0; j < cols; ++j) s += "," + cell(i, j);
    s += "\n";
  }
  return s;
}

}  // namespace

std::string matrix_csv(const Matrix& m) {
  return csv(m.rows(), m.cols(), [&](Eigen::Index i, Eigen::Index j) { return shortest(m(i, j)); });
}

std::string matrix_csv(const IntMatrix& m) {
  return csv(m.rows(), m.cols(), [&](Eigen::Index i, Eigen::Index j) { return std::to_string(m(i, j)); });
}

std::string matrix_csv(const ExtendedMatrix& m) {
  return csv(m.rows(), m.cols(), [&](Eigen::Index i, Eigen::Index j) {
    return m.is_omega(i, j) ? std::string("omega") : shortest(m.value(i, j));
  });
}

std::string export_obj(const UnitCell& cell) {
  std::string s = "# " + std::to_string(cell.nodes.size()) + " nodes, " + std::to_string(cell.struts.size()) + " struts\n";
  for (const auto& node : cell.nodes)
    s += "v " + shortest(node.position[0]) + " " + shortest(node.position[1]) + " " + shortest(node.position[2]) + "\n";
  for (const auto& st : cell.struts) s += "l " + std::to_string(st.i) + " " + std::to_string(st.j) + "\n";
  return s;
}

}  // namespace lattice::io

#include "lattice/cli.hpp"

#include "lattice/canonicalizer.hpp"
#include "lattice/encoder.hpp"
#include "lattice/io.hpp"
#include "lattice/mechanics.hpp"
#include "lattice/properties.hpp"
#include "lattice/reconstructor.hpp"
#include "lattice/tessellator.hpp"
#include "lattice/validator.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

namespace lattice::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string out;
  std::optional<double> tol_pos;
  std::optional<double> tol_dist;
  std::string chirality = "strict";
  int m = 1;
  std::string dims = "1x1x1";
  std::string format;
  std::optional<double> rho_s;
  std::string torsion = "circular";
  double nu = 0.3;
  std::vector<int> fix;
  std::vector<std::string> loads;
  bool any_labels = false;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

using Input = std::variant<io::LatticeFile, io::DescriptorFile>;

const std::string& single_input(const Options& o) {
  if (o.inputs.size() != 1) throw UsageError("expected exactly one input file (--in)");
  return o.inputs.front();
}

canonicalizer::FingerprintConfig fingerprint_config(const Options& o) {
  canonicalizer::FingerprintConfig cfg;
  cfg.mode = o.chirality == "ignore" ? canonicalizer::ChiralityMode::Ignore : canonicalizer::ChiralityMode::Strict;
  cfg.position_tolerance = o.tol_pos;
  cfg.distance_tolerance = o.tol_dist;
  return cfg;
}

double cell_tolerance(const Options& o, const UnitCell& cell) {
  return o.tol_pos ? *o.tol_pos : default_position_tolerance(cell);
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) out << text;
  else io::write_text(o.out, text);
}

io::DescriptorFile descriptor_file(const DescriptorSet& d, const std::string& fp) {
  io::DescriptorFile f;
  f.descriptors = d;
  f.fingerprint = fp;
  return f;
}

void print_report(const validator::ValidationReport& report, std::ostream& out) {
  for (const auto& v : report.violations) {
    out << validator::rule_name(v.rule);
    if (!v.nodes.empty()) {
      out << " nodes=";
      for (std::size_t k = 0; k < v.nodes.size(); ++k) out << (k ? "," : "") << v.nodes[k];
    }
    if (!v.struts.empty()) {
      out << " struts=";
      for (std::size_t k = 0; k < v.struts.size(); ++k)
        out << (k ? "," : "") << v.struts[k].first << "-" << v.struts[k].second;
    }
    if (!v.detail.empty()) out << " (" << v.detail << ")";
    out << "\n";
  }
  out << "periodic_dimension=" << report.periodic_dimension << "\n";
  out << (report.clean() ? "clean" : "violations=" + std::to_string(report.violations.size())) << "\n";
}

// Descriptors of a lattice file without rule checks, so that defective
// cells still reach the validator.
DescriptorSet raw_descriptors(const UnitCell& cell, double tol) {
  const auto mats = encoder::encode_struts(cell);
  return {encoder::pairwise_distances(cell), mats.density, mats.stretch, mats.bend, encoder::encode_packing(cell, tol)};
}

UnitCell cell_of(const Input& in, const Options& o) {
  if (const auto* l = std::get_if<io::LatticeFile>(&in)) return l->cell;
  reconstructor::ReconstructConfig rc;
  rc.distance_tolerance = o.tol_dist;
  rc.position_tolerance = o.tol_pos;
  rc.require_canonical_labeling = !o.any_labels;
  return reconstructor::reconstruct(std::get<io::DescriptorFile>(in).descriptors, rc).cell;
}

DescriptorSet descriptors_of(const Input& in, const Options& o) {
  if (const auto* d = std::get_if<io::DescriptorFile>(&in)) return d->descriptors;
  const UnitCell& cell = std::get<io::LatticeFile>(in).cell;
  encoder::EncodeConfig ec;
  ec.position_tolerance = cell_tolerance(o, cell);
  return encoder::encode(cell, ec);
}

std::string fingerprint_of(const Input& in, const Options& o) {
  const auto cfg = fingerprint_config(o);
  if (const auto* l = std::get_if<io::LatticeFile>(&in)) return canonicalizer::fingerprint(l->cell, cfg).hex();
  return canonicalizer::fingerprint(std::get<io::DescriptorFile>(in).descriptors, cfg).hex();
}

// ---------------------------------------------------------------------------

int cmd_encode(const Options& o, std::ostream& out, std::ostream&) {
  const io::LatticeFile file = io::load_lattice(single_input(o));
  const DescriptorSet d = descriptors_of(file, o);
  emit(o, io::write_descriptors(descriptor_file(d, fingerprint_of(file, o))), out);
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  validator::ValidateConfig vc;
  vc.distance_tolerance = o.tol_dist;
  validator::ValidationReport report;
  if (const auto* l = std::get_if<io::LatticeFile>(&in)) {
    const double tol = cell_tolerance(o, l->cell);
    vc.position_tolerance = tol;
    report = validator::validate(raw_descriptors(l->cell, tol), &l->cell, vc);
  } else {
    vc.position_tolerance = o.tol_pos;
    report = validator::validate(std::get<io::DescriptorFile>(in).descriptors, nullptr, vc);
  }
  std::ostringstream text;
  print_report(report, text);
  emit(o, text.str(), out);
  return report.clean() ? 0 : 1;
}

int cmd_canonicalize(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  const auto cfg = fingerprint_config(o);
  const auto form = std::holds_alternative<io::LatticeFile>(in)
                        ? canonicalizer::canonical_form(std::get<io::LatticeFile>(in).cell, cfg)
                        : canonicalizer::canonical_form(std::get<io::DescriptorFile>(in).descriptors, cfg);
  const std::string hex = canonicalizer::to_hex(canonicalizer::sha256(form.serialization));
  emit(o, io::write_descriptors(descriptor_file(form.descriptors, hex)), out);
  return 0;
}

int cmd_fingerprint(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  emit(o, fingerprint_of(in, o) + "\n", out);
  return 0;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
  if (o.inputs.size() != 2) throw UsageError("compare needs exactly two input files");
  const Input a = io::load_any(o.inputs[0]);
  const Input b = io::load_any(o.inputs[1]);
  const bool same = fingerprint_of(a, o) == fingerprint_of(b, o);
  out << (same ? "equivalent" : "distinct") << "\n";
  return same ? 0 : 1;
}

int cmd_reconstruct(const Options& o, std::ostream& out, std::ostream& err) {
  const io::DescriptorFile file = io::load_descriptors(single_input(o));
  reconstructor::ReconstructConfig rc;
  rc.distance_tolerance = o.tol_dist;
  rc.position_tolerance = o.tol_pos;
  rc.require_canonical_labeling = !o.any_labels;
  const auto rec = reconstructor::reconstruct(file.descriptors, rc);
  if (!rec.chirality_resolved)
    err << "note: only " << rec.periodic_dimension
        << " periodic axes; handedness is not determined, the reference embedding is written\n";
  io::LatticeFile lf;
  lf.cell = rec.cell;
  emit(o, io::write_lattice(lf), out);
  return 0;
}

std::optional<double> shared_parent_density(const Input& in) {
  const auto* l = std::get_if<io::LatticeFile>(&in);
  if (!l || l->cell.struts.empty()) return std::nullopt;
  std::optional<double> rho;
  for (const auto& s : l->cell.struts) {
    if (!s.spec) return std::nullopt;
    if (rho && *rho != s.spec->material.density) return std::nullopt;
    rho = s.spec->material.density;
  }
  return rho;
}

int cmd_properties(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  const DescriptorSet d = descriptors_of(in, o);
  const std::optional<double> rho_s = o.rho_s ? o.rho_s : shared_parent_density(in);
  const auto summary = properties::summarize(d, rho_s);
  out << "s=" << summary.counts.s << "\ne=" << summary.counts.e << "\nZ=" << summary.counts.Z << "\nW=" << summary.W
      << "\n";
  out << "rho=" << (summary.rho ? std::to_string(*summary.rho) : std::string("n/a")) << "\n";
  out << "rho_bar=" << (summary.relative_rho ? std::to_string(*summary.relative_rho) : std::string("n/a")) << "\n";
  if (!o.out.empty()) {
    const auto c = properties::coefficient_matrices(d.G, d.Kt, d.Kb);
    if (o.format == "csv") {
      io::write_text(o.out, "# C_et\n" + io::matrix_csv(c.stretch) + "# C1_ef\n" + io::matrix_csv(c.bend1) +
                                "# C2_ef\n" + io::matrix_csv(c.bend2) + "# C3_ef\n" + io::matrix_csv(c.bend3));
    } else {
      io::write_text(o.out, io::coefficients_json(c));
    }
  }
  return 0;
}

int component_index(const std::string& name) {
  static const std::array<const char*, 6> names{"ux", "uy", "uz", "rx", "ry", "rz"};
  for (int k = 0; k < 6; ++k)
    if (name == names[static_cast<std::size_t>(k)]) return k;
  throw UsageError("unknown DOF component '" + name + "' (use ux, uy, uz, rx, ry, rz)");
}

int cmd_stiffness(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  const UnitCell cell = cell_of(in, o);
  mechanics::MechanicsConfig mc;
  mc.m = o.m;
  mc.torsion = o.torsion == "off" ? mechanics::TorsionPadding::Off : mechanics::TorsionPadding::Circular;
  mc.poisson_ratio = o.nu;
  const auto sys = mechanics::assemble_global(cell, mc);

  nlohmann::ordered_json doc;
  doc["m"] = o.m;
  doc["dofs"] = sys.dof_count();
  doc["torsion_singular"] = sys.torsion_singular;
  auto to_json = [](const auto& mat) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json locals = nlohmann::json::array();
  for (const auto& s : cell.struts) {
    const double r = (cell.position(s.j) - cell.position(s.i)).norm();
    locals.push_back({{"i", s.i},
                      {"j", s.j},
                      {"K", to_json(mechanics::element_stiffness_local(s.stretch_stiffness, s.bend_stiffness, r, o.m))}});
  }
  doc["element_local"] = std::move(locals);
  doc["global"] = to_json(sys.K);

  if (!o.fix.empty()) {
    std::vector<mechanics::Constraint> constraints;
    for (int node : o.fix) {
      if (node < 1 || static_cast<std::size_t>(node) > sys.positions.size())
        throw UsageError("--fix node " + std::to_string(node) + " does not exist");
      for (int c = 0; c < 6; ++c) constraints.push_back({mechanics::GlobalSystem::dof(node - 1, c), 0.0});
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.dof_count()));
    for (const auto& spec : o.loads) {
      const auto a = spec.find(':');
      const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
      if (a == std::string::npos || b == std::string::npos) throw UsageError("--load expects node:component:value");
      const int node = std::stoi(spec.substr(0, a));
      if (node < 1 || static_cast<std::size_t>(node) > sys.positions.size())
        throw UsageError("--load node " + std::to_string(node) + " does not exist");
      f[mechanics::GlobalSystem::dof(node - 1, component_index(spec.substr(a + 1, b - a - 1)))] +=
          std::stod(spec.substr(b + 1));
    }
    const auto sol = mechanics::solve_static(sys.K, constraints, f, mc.solver_tolerance);
    nlohmann::json disp = nlohmann::json::array();
    nlohmann::json reac = nlohmann::json::array();
    for (std::size_t q = 0; q < sys.positions.size(); ++q) {
      disp.push_back(std::vector<double>(sol.displacements.data() + 6 * q, sol.displacements.data() + 6 * q + 6));
      reac.push_back(std::vector<double>(sol.reactions.data() + 6 * q, sol.reactions.data() + 6 * q + 6));
    }
    doc["solution"] = {{"displacements", disp}, {"reactions", reac}, {"residual", sol.residual}};
  }

  if (o.format == "csv") emit(o, io::matrix_csv(sys.K), out);
  else emit(o, doc.dump(1) + "\n", out);
  return 0;
}

std::array<int, 3> parse_dims(const std::string& s) {
  std::array<int, 3> d{};
  char x1 = 0, x2 = 0;
  std::istringstream in(s);
  if (!(in >> d[0] >> x1 >> d[1] >> x2 >> d[2]) || x1 != 'x' || x2 != 'x' || in.peek() != EOF)
    throw UsageError("--dims expects M1xM2xM3, got '" + s + "'");
  return d;
}

int cmd_tessellate(const Options& o, std::ostream& out, std::ostream& err) {
  const io::LatticeFile file = io::load_lattice(single_input(o));
  const auto t = tessellator::tessellate(file.cell, parse_dims(o.dims), o.tol_pos);
  io::LatticeFile lf = file;
  lf.cell = t.to_cell();
  emit(o, io::write_lattice(lf), out);
  (o.out.empty() ? err : out) << "s=" << t.s() << " e=" << t.e() << " Z=" << t.Z() << "\n";
  return 0;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream&) {
  const Input in = io::load_any(single_input(o));
  if (o.format.empty() || o.format == "obj") {
    emit(o, io::export_obj(cell_of(in, o)), out);
  } else if (o.format == "csv") {
    const DescriptorSet d = descriptors_of(in, o);
    emit(o,
         "# G\n" + io::matrix_csv(d.G) + "# D\n" + io::matrix_csv(d.D) + "# Kt\n" + io::matrix_csv(d.Kt) + "# Kb\n" +
             io::matrix_csv(d.Kb) + "# P\n" + io::matrix_csv(d.P),
         out);
  } else {
    io::LatticeFile lf;
    lf.cell = cell_of(in, o);
    emit(o, io::write_lattice(lf), out);
  }
  return 0;
}

using Handler = int (*)(const Options&, std::ostream&, std::ostream&);

int guarded(Handler h, const Options& o, std::ostream& out, std::ostream& err) {
  try {
    return h(o, out, err);
  } catch (const validator::ValidationFailed& e) {
    err << "validation failed:\n";
    print_report(e.report, err);
    return 1;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

std::string output_name(const std::string& cmd, const Options& o, const fs::path& in) {
  std::string ext = ".json";
  if (cmd == "export") ext = o.format == "csv" ? ".csv" : o.format == "json" ? ".json" : ".obj";
  else if (cmd == "validate" || cmd == "fingerprint") ext = ".txt";
  else if (cmd == "stiffness" && o.format == "csv") ext = ".csv";
  return in.stem().string() + ext;
}

// Every *.json file of a directory, processed concurrently; reports are
// printed in file-name order.
int run_batch(const std::string& cmd, Handler h, const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.inputs.front()))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (!o.out.empty()) fs::create_directories(o.out);

  struct Result {
    int code = 0;
    std::string out;
    std::string err;
  };
  std::vector<std::future<Result>> jobs;
  for (const auto& f : files) {
    Options per = o;
    per.inputs = {f.string()};
    per.out = o.out.empty() ? std::string() : (fs::path(o.out) / output_name(cmd, o, f)).string();
    jobs.push_back(std::async(std::launch::async, [h, per] {
      std::ostringstream so, se;
      const int code = guarded(h, per, so, se);
      return Result{code, so.str(), se.str()};
    }));
  }
  int worst = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const Result r = jobs[k].get();
    const std::string name = files[k].filename().string();
    auto prefixed = [&](const std::string& text, std::ostream& s) {
      std::istringstream lines(text);
      for (std::string line; std::getline(lines, line);) s << name << ": " << line << "\n";
    };
    prefixed(r.out, out);
    prefixed(r.err, err);
    worst = std::max(worst, r.code);
  }
  return worst;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Encode, validate and compare periodic lattice truss unit cells", "lattice_codec"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<std::string, Handler>> commands{
      {"encode", cmd_encode},           {"validate", cmd_validate},       {"canonicalize", cmd_canonicalize},
      {"fingerprint", cmd_fingerprint}, {"compare", cmd_compare},         {"reconstruct", cmd_reconstruct},
      {"properties", cmd_properties},   {"stiffness", cmd_stiffness},     {"tessellate", cmd_tessellate},
      {"export", cmd_export}};
  const std::map<std::string, std::string> help{
      {"encode", "lattice file -> descriptor file"},
      {"validate", "report rule violations of a lattice or descriptor file"},
      {"canonicalize", "canonically relabeled descriptor file"},
      {"fingerprint", "print the SHA-256 fingerprint"},
      {"compare", "report whether two inputs are the same lattice"},
      {"reconstruct", "descriptor file -> lattice file"},
      {"properties", "print s, e, Z, W, rho, rho_bar; --out writes coefficient matrices"},
      {"stiffness", "element and global stiffness matrices, optional static solve"},
      {"tessellate", "tile a lattice file M1xM2xM3 times"},
      {"export", "OBJ line export (or csv descriptor matrices)"}};

  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const auto& [name, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--in,inputs", o.inputs, "input file(s) or a directory of *.json files");
    sub->add_option("--out", o.out, "output file (directory in batch mode)");
    sub->add_option("--tol-pos", o.tol_pos, "position tolerance (default 1e-9 max L, or $LATTICE_CODEC_TOL_POS)");
    sub->add_option("--tol-dist", o.tol_dist, "distance tolerance (default 1e-6 max G)");
    sub->add_option("--chirality", o.chirality, "strict or ignore")->check(CLI::IsMember({"strict", "ignore"}));
    sub->add_option("--format", o.format, "json, csv or obj")->check(CLI::IsMember({"json", "csv", "obj"}));
    sub->add_flag("--any-labels", o.any_labels, "accept non-canonical node labels when reconstructing");
    if (name == "stiffness") {
      sub->add_option("--m", o.m, "elements per strut")->check(CLI::PositiveNumber);
      sub->add_option("--torsion", o.torsion, "circular or off")->check(CLI::IsMember({"circular", "off"}));
      sub->add_option("--nu", o.nu, "Poisson ratio for struts without one");
      sub->add_option("--fix", o.fix, "clamp all six DOFs of a node (repeatable)");
      sub->add_option("--load", o.loads, "node:component:value with component in ux..rz (repeatable)");
    }
    if (name == "tessellate") sub->add_option("--dims", o.dims, "M1xM2xM3");
    if (name == "properties") sub->add_option("--rho-s", o.rho_s, "parent material density");
    subs.emplace_back(sub, handler);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (!o.tol_pos) {
    if (const char* env = std::getenv("LATTICE_CODEC_TOL_POS")) {
      try {
        std::size_t used = 0;
        o.tol_pos = std::stod(env, &used);
        if (used != std::string(env).size() || !(*o.tol_pos > 0.0)) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        err << "error: LATTICE_CODEC_TOL_POS must be a positive number\n";
        return 2;
      }
    }
  }
  if (o.tol_pos && !(*o.tol_pos > 0.0)) {
    err << "error: --tol-pos must be positive\n";
    return 2;
  }

  for (const auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    if (o.inputs.empty()) {
      err << "error: no input file given (--in)\n";
      return 2;
    }
    if (name != "compare" && o.inputs.size() == 1 && fs::is_directory(o.inputs.front()))
      return run_batch(name, handler, o, out, err);
    return guarded(handler, o, out, err);
  }
  return 2;
}

}  // namespace lattice::cli

#include "lattice/canonicalizer.hpp"
#include "lattice/cli.hpp"
#include "lattice/encoder.hpp"
#include "lattice/io.hpp"
#include "lattice/mechanics.hpp"
#include "lattice/properties.hpp"
#include "lattice/reconstructor.hpp"
#include "lattice/tessellator.hpp"
#include "lattice/validator.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace lattice;

namespace {

using NodeArray = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

NodeArray node_array(const UnitCell& cell) {
  NodeArray x(static_cast<Eigen::Index>(cell.size()), 3);
  for (std::size_t k = 0; k < cell.size(); ++k) x.row(static_cast<Eigen::Index>(k)) = cell.nodes[k].position.transpose();
  return x;
}

std::vector<std::pair<int, int>> strut_pairs(const UnitCell& cell) {
  std::vector<std::pair<int, int>> out;
  for (const auto& s : cell.struts) out.emplace_back(s.i, s.j);
  return out;
}

canonicalizer::FingerprintConfig fingerprint_config(const std::string& chirality) {
  canonicalizer::FingerprintConfig cfg;
  if (chirality == "ignore") cfg.mode = canonicalizer::ChiralityMode::Ignore;
  else if (chirality != "strict") throw py::value_error("chirality must be 'strict' or 'ignore'");
  return cfg;
}

DescriptorSet make_descriptors(const Matrix& G, const Matrix& D, const Matrix& Kt, const Matrix& Kb, const IntMatrix& P) {
  DescriptorSet d{G, D, Kt, Kb, P};
  check_structure(d);
  return d;
}

}  // namespace

PYBIND11_MODULE(_lattice_codec, m) {
  m.doc() = "Matrix descriptors for periodic lattice truss unit cells";

  static py::exception<Error> base(m, "LatticeError", PyExc_RuntimeError);
  static py::exception<io::ParseError> parse(m, "ParseError", base.ptr());
  static py::exception<validator::ValidationFailed> failed(m, "ValidationFailed", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const io::ParseError& e) {
      parse(e.what());
    } catch (const validator::ValidationFailed& e) {
      failed(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<UnitCell>(m, "Cell")
      .def_static("from_json", [](const std::string& text) { return io::parse_lattice(text).cell; })
      .def_static("load", [](const std::string& path) { return io::load_lattice(path).cell; })
      .def("to_json", [](const UnitCell& c) {
        io::LatticeFile f;
        f.cell = c;
        return io::write_lattice(f);
      })
      .def_property_readonly("nodes", &node_array)
      .def_property_readonly("struts", &strut_pairs)
      .def_property_readonly("obb", [](const UnitCell& c) { return c.obb_lengths; })
      .def("__len__", &UnitCell::size)
      .def("__repr__", [](const UnitCell& c) {
        return "<Cell nodes=" + std::to_string(c.size()) + " struts=" + std::to_string(c.struts.size()) + ">";
      });

  py::class_<DescriptorSet>(m, "Descriptors")
      .def(py::init(&make_descriptors), py::arg("G"), py::arg("D"), py::arg("Kt"), py::arg("Kb"), py::arg("P"))
      .def_readonly("G", &DescriptorSet::G)
      .def_readonly("D", &DescriptorSet::D)
      .def_readonly("Kt", &DescriptorSet::Kt)
      .def_readonly("Kb", &DescriptorSet::Kb)
      .def_readonly("P", &DescriptorSet::P)
      .def_static("from_json", [](const std::string& text) { return io::parse_descriptors(text).descriptors; })
      .def("to_json", [](const DescriptorSet& d) {
        io::DescriptorFile f;
        f.descriptors = d;
        return io::write_descriptors(f);
      })
      .def("__len__", &DescriptorSet::size);

  m.def("encode", [](const UnitCell& c) { return encoder::encode(c); }, py::arg("cell"));

  m.def(
      "validate",
      [](const UnitCell& c) {
        const auto s = encoder::encode_struts(c);
        const double tol = default_position_tolerance(c);
        const DescriptorSet d{encoder::pairwise_distances(c), s.density, s.stretch, s.bend,
                              encoder::encode_packing(c, tol)};
        const auto report = validator::validate(d, &c);
        py::list violations;
        for (const auto& v : report.violations)
          violations.append(py::dict(py::arg("rule") = validator::rule_name(v.rule), py::arg("nodes") = v.nodes,
                                     py::arg("struts") = v.struts, py::arg("detail") = v.detail));
        return py::dict(py::arg("violations") = violations, py::arg("periodic_dimension") = report.periodic_dimension);
      },
      py::arg("cell"));

  m.def(
      "fingerprint",
      [](const UnitCell& c, const std::string& chirality) {
        return canonicalizer::fingerprint(c, fingerprint_config(chirality)).hex();
      },
      py::arg("cell"), py::arg("chirality") = "strict");
  m.def(
      "fingerprint",
      [](const DescriptorSet& d, const std::string& chirality) {
        return canonicalizer::fingerprint(d, fingerprint_config(chirality)).hex();
      },
      py::arg("descriptors"), py::arg("chirality") = "strict");

  m.def(
      "reconstruct",
      [](const DescriptorSet& d, bool any_labels) {
        reconstructor::ReconstructConfig cfg;
        cfg.require_canonical_labeling = !any_labels;
        return reconstructor::reconstruct(d, cfg).cell;
      },
      py::arg("descriptors"), py::arg("any_labels") = false);

  m.def(
      "properties",
      [](const DescriptorSet& d, std::optional<double> rho_s) {
        const auto s = properties::summarize(d, rho_s);
        return py::dict(py::arg("s") = s.counts.s, py::arg("e") = s.counts.e, py::arg("Z") = s.counts.Z,
                        py::arg("W") = s.W, py::arg("rho") = s.rho, py::arg("rho_bar") = s.relative_rho);
      },
      py::arg("descriptors"), py::arg("rho_s") = py::none());

  m.def(
      "element_stiffness",
      [](double t, double b, double r, int m) -> Eigen::MatrixXd {
        return mechanics::element_stiffness_local(t, b, r, m);
      },
      py::arg("t"), py::arg("b"), py::arg("r"), py::arg("m") = 1);

  m.def(
      "tessellate",
      [](const UnitCell& c, std::array<int, 3> dims) { return tessellator::tessellate(c, dims).to_cell(); },
      py::arg("cell"), py::arg("dims"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  m.attr("__version__") = PROJECT_VERSION_STRING;
}

#include "lattice/encoder.hpp"

#include "lattice/validator.hpp"

#include <cmath>
#include <numbers>

namespace lattice::encoder {

double EncodeConfig::tolerance_for(const UnitCell& cell) const {
  if (position_tolerance) {
    if (!(*position_tolerance > 0.0)) throw DomainError("position tolerance must be positive");
    return *position_tolerance;
  }
  return default_position_tolerance(cell);
}

StrutProperties circular_strut_properties(double radius, const Material& material) {
  if (!(radius > 0.0)) throw DomainError("strut radius must be positive");
  check_material(material);
  const double r2 = radius * radius;
  return {std::numbers::pi * material.density * r2, std::numbers::pi * material.youngs_modulus * r2,
          std::numbers::pi * material.youngs_modulus * r2 * r2 / 4.0};
}

StrutProperties section_properties(const StrutSection& section, const Material& material) {
  if (const auto* c = std::get_if<CircularSection>(&section)) return circular_strut_properties(c->radius, material);
  const auto& e = std::get<ExplicitSection>(section);
  if (!(e.area > 0.0) || !(e.second_moment > 0.0) || !(e.linear_density > 0.0))
    throw DomainError("explicit section values must be positive");
  if (!(material.youngs_modulus > 0.0)) throw DomainError("Young's modulus must be positive");
  return {e.linear_density, material.youngs_modulus * e.area, material.youngs_modulus * e.second_moment};
}

Strut make_strut(int i, int j, const StrutSection& section, const Material& material) {
  const StrutProperties p = section_properties(section, material);
  return Strut{i, j, p.stretch_stiffness, p.bend_stiffness, p.linear_density, StrutSpec{section, material}};
}

Matrix pairwise_distances(const UnitCell& cell) {
  const auto n = static_cast<Eigen::Index>(cell.size());
  Matrix g = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = (cell.nodes[static_cast<std::size_t>(i)].position -
                        cell.nodes[static_cast<std::size_t>(j)].position)
                           .norm();
      g(i, j) = r;
      g(j, i) = r;
    }
  }
  return g;
}

Matrix encode_geometry(const UnitCell& cell, double position_tolerance) {
  Matrix g = pairwise_distances(cell);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = i + 1; j < g.cols(); ++j)
      if (g(i, j) < position_tolerance) throw RepeatedNodesError(static_cast<int>(i + 1), static_cast<int>(j + 1));
  return g;
}

StrutMatrices encode_struts(const UnitCell& cell) {
  const auto n = static_cast<Eigen::Index>(cell.size());
  StrutMatrices out{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (const Strut& s : cell.struts) {
    if (s.i < 1 || s.i > n || s.j < 1 || s.j > n || s.i == s.j)
      throw InvalidInputError("strut (" + std::to_string(s.i) + ", " + std::to_string(s.j) + ") is malformed");
    const Eigen::Index a = s.i - 1;
    const Eigen::Index b = s.j - 1;
    if (out.density(a, b) != 0.0) throw DuplicateStrutError(std::min(s.i, s.j), std::max(s.i, s.j));
    out.density(a, b) = out.density(b, a) = s.linear_density;
    out.stretch(a, b) = out.stretch(b, a) = s.stretch_stiffness;
    out.bend(a, b) = out.bend(b, a) = s.bend_stiffness;
  }
  return out;
}

IntMatrix encode_packing(const UnitCell& cell, double position_tolerance) {
  const auto n = static_cast<Eigen::Index>(cell.size());
  IntMatrix p = IntMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec3 diff = cell.nodes[static_cast<std::size_t>(j)].position - cell.nodes[static_cast<std::size_t>(i)].position;
      for (int d = 0; d < 3; ++d) {
        bool match = std::abs(diff[d] - cell.obb_lengths[d]) <= position_tolerance;
        for (int e = 0; e < 3 && match; ++e)
          if (e != d && std::abs(diff[e]) > position_tolerance) match = false;
        if (!match) continue;
        if (p(i, j) != 0)
          throw GeometryError("node pair (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                              ") is a periodic translate along more than one axis");
        p(i, j) = d + 1;
        p(j, i) = -(d + 1);
      }
    }
  }
  return p;
}

DescriptorSet encode(const UnitCell& cell, const EncodeConfig& config) {
  const double tol = config.tolerance_for(cell);
  check_cell(cell, tol);
  DescriptorSet desc;
  desc.G = encode_geometry(cell, tol);
  StrutMatrices s = encode_struts(cell);
  desc.D = std::move(s.density);
  desc.Kt = std::move(s.stretch);
  desc.Kb = std::move(s.bend);
  desc.P = encode_packing(cell, tol);
  if (config.run_validation) {
    validator::ValidateConfig vc;
    vc.position_tolerance = tol;
    validator::ValidationReport report = validator::validate(desc, &cell, vc);
    if (!report.clean()) throw validator::ValidationFailed(std::move(report));
  }
  return desc;
}

IntMatrix adjacency(const Matrix& density) { return (density.array() != 0.0).cast<int>(); }

}  // namespace lattice::encoder

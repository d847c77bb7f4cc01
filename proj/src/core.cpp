#include "lattice/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace lattice {

IllPosedDivisionError::IllPosedDivisionError(std::size_t r, std::size_t c)
    : Error("ill-posed division: nonzero numerator over zero divisor at (" + std::to_string(r) + ", " +
            std::to_string(c) + ")"),
      row(r),
      col(c) {}

RepeatedNodesError::RepeatedNodesError(int a, int b)
    : Error("repeated nodes: nodes " + std::to_string(a) + " and " + std::to_string(b) +
            " occupy the same position"),
      first(a),
      second(b) {}

DuplicateStrutError::DuplicateStrutError(int a, int b)
    : Error("duplicate strut between nodes " + std::to_string(a) + " and " + std::to_string(b)),
      first(a),
      second(b) {}

void check_material(const Material& material) {
  if (!(material.youngs_modulus > 0.0)) throw DomainError("Young's modulus must be positive");
  if (!(material.density > 0.0)) throw DomainError("material density must be positive");
  if (material.poisson_ratio) {
    const double nu = *material.poisson_ratio;
    if (!(nu > -1.0 && nu < 0.5)) throw DomainError("Poisson ratio must lie in (-1, 0.5)");
  }
}

double default_position_tolerance(const UnitCell& cell) {
  return 1e-9 * cell.obb_lengths.maxCoeff();
}

void check_cell(const UnitCell& cell, double tolerance) {
  const auto n = static_cast<int>(cell.nodes.size());
  if (n == 0) throw InvalidInputError("unit cell has no nodes");
  for (int d = 0; d < 3; ++d) {
    if (!(cell.obb_lengths[d] > 0.0) || !std::isfinite(cell.obb_lengths[d]))
      throw InvalidInputError("OBB length L" + std::to_string(d + 1) + " must be positive and finite");
  }
  for (int k = 0; k < n; ++k) {
    const Node& node = cell.nodes[static_cast<std::size_t>(k)];
    if (node.id != k + 1)
      throw InvalidInputError("node ids must be exactly 1..n in order; found id " + std::to_string(node.id) +
                              " at position " + std::to_string(k + 1));
    for (int d = 0; d < 3; ++d) {
      const double x = node.position[d];
      if (!std::isfinite(x) || x < -tolerance || x > cell.obb_lengths[d] + tolerance) {
        std::ostringstream msg;
        msg << "node " << node.id << " lies outside the OBB along axis " << d + 1 << " (coordinate " << x
            << ", L = " << cell.obb_lengths[d] << ")";
        throw InvalidInputError(msg.str());
      }
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const Strut& s : cell.struts) {
    if (s.i < 1 || s.i > n || s.j < 1 || s.j > n)
      throw InvalidInputError("strut (" + std::to_string(s.i) + ", " + std::to_string(s.j) +
                              ") references a missing node");
    if (s.i == s.j) throw InvalidInputError("strut endpoints must differ (node " + std::to_string(s.i) + ")");
    if (!(s.stretch_stiffness > 0.0) || !(s.bend_stiffness > 0.0) || !(s.linear_density > 0.0))
      throw InvalidInputError("strut (" + std::to_string(s.i) + ", " + std::to_string(s.j) +
                              ") must have positive stiffness and linear density");
    const auto key = std::minmax(s.i, s.j);
    if (!seen.insert(key).second) throw DuplicateStrutError(key.first, key.second);
  }
}

namespace {

void require_square(const char* name, const auto& m, Eigen::Index n) {
  if (m.rows() != n || m.cols() != n)
    throw InvalidInputError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

void require_symmetric_hollow(const char* name, const Matrix& m) {
  const double scale = std::max(1.0, max_finite(m));
  const double tol = 1e-12 * scale;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0)
      throw InvalidInputError(std::string(name) + " must have a zero diagonal (entry " + std::to_string(i + 1) + ")");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j)))
        throw InvalidInputError(std::string(name) + " has a non-finite entry at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
      if (m(i, j) < 0.0)
        throw InvalidInputError(std::string(name) + " has a negative entry at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
      if (std::abs(m(i, j) - m(j, i)) > tol)
        throw InvalidInputError(std::string(name) + " is not symmetric at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
    }
  }
}

}  // namespace

void check_structure(const DescriptorSet& desc) {
  const Eigen::Index n = desc.G.rows();
  if (n == 0) throw InvalidInputError("descriptor set is empty");
  require_square("G", desc.G, n);
  require_square("D", desc.D, n);
  require_square("Kt", desc.Kt, n);
  require_square("Kb", desc.Kb, n);
  require_square("P", desc.P, n);
  require_symmetric_hollow("G", desc.G);
  require_symmetric_hollow("D", desc.D);
  require_symmetric_hollow("Kt", desc.Kt);
  require_symmetric_hollow("Kb", desc.Kb);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool d = desc.D(i, j) != 0.0;
      if (d != (desc.Kt(i, j) != 0.0) || d != (desc.Kb(i, j) != 0.0))
        throw InvalidInputError("D, Kt and Kb must share the same support; mismatch at (" + std::to_string(i + 1) +
                                ", " + std::to_string(j + 1) + ")");
      const int p = desc.P(i, j);
      if (p < -3 || p > 3)
        throw InvalidInputError("P entries must lie in {-3..3}; found " + std::to_string(p) + " at (" +
                                std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
      if (p != -desc.P(j, i))
        throw InvalidInputError("P is not skew-symmetric at (" + std::to_string(i + 1) + ", " +
                                std::to_string(j + 1) + ")");
    }
  }
}

double max_finite(const Matrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::isfinite(m(i, j))) best = std::max(best, std::abs(m(i, j)));
  return best;
}

// ---------------------------------------------------------------------------

ExtendedMatrix::ExtendedMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows),
      cols_(cols),
      values_(static_cast<std::size_t>(rows * cols), 0.0),
      defined_(static_cast<std::size_t>(rows * cols), true) {}

std::size_t ExtendedMatrix::index(Eigen::Index i, Eigen::Index j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw DimensionError("extended matrix index out of range");
  return static_cast<std::size_t>(i * cols_ + j);
}

std::optional<double> ExtendedMatrix::at(Eigen::Index i, Eigen::Index j) const {
  const auto k = index(i, j);
  if (!defined_[k]) return std::nullopt;
  return values_[k];
}

double ExtendedMatrix::value(Eigen::Index i, Eigen::Index j) const {
  const auto k = index(i, j);
  if (!defined_[k])
    throw DomainError("entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ") is omega");
  return values_[k];
}

void ExtendedMatrix::set(Eigen::Index i, Eigen::Index j, double v) {
  const auto k = index(i, j);
  values_[k] = v;
  defined_[k] = true;
}

void ExtendedMatrix::set_omega(Eigen::Index i, Eigen::Index j) {
  const auto k = index(i, j);
  values_[k] = 0.0;
  defined_[k] = false;
}

Matrix hadamard_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hadamard_product: shape mismatch");
  return a.cwiseProduct(b);
}

ExtendedMatrix hadamard_div(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("hadamard_div: shape mismatch");
  ExtendedMatrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (b(i, j) != 0.0) {
        out.set(i, j, a(i, j) / b(i, j));
      } else if (a(i, j) == 0.0) {
        out.set_omega(i, j);
      } else {
        throw IllPosedDivisionError(static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1));
      }
    }
  }
  return out;
}

double entrywise_l1(const Matrix& a) { return a.cwiseAbs().sum(); }

std::size_t entrywise_l0(const Matrix& a) {
  return static_cast<std::size_t>((a.array() != 0.0).count());
}

std::size_t entrywise_l0(const IntMatrix& a) {
  return static_cast<std::size_t>((a.array() != 0).count());
}

}  // namespace lattice

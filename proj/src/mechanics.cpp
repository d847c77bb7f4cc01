#include "lattice/mechanics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lattice::mechanics {

namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(name) + " must be positive and finite");
}

}  // namespace

Eigen::Matrix2d axial_relation(double t, double r) {
  require_positive(t, "stretching stiffness");
  require_positive(r, "strut length");
  Eigen::Matrix2d k;
  k << 1.0, -1.0, -1.0, 1.0;
  return (t / r) * k;
}

Eigen::Matrix4d flexural_relation(double b, double r) {
  require_positive(b, "bending stiffness");
  require_positive(r, "strut length");
  Eigen::Matrix4d k;
  // clang-format off
  k << 12.0,     6.0 * r,     -12.0,    6.0 * r,
       6.0 * r,  4.0 * r * r, -6.0 * r, 2.0 * r * r,
       -12.0,    -6.0 * r,    12.0,     -6.0 * r,
       6.0 * r,  2.0 * r * r, -6.0 * r, 4.0 * r * r;
  // clang-format on
  return (b / (r * r * r)) * k;
}

ElementStiffness element_stiffness_local(double t, double b, double r, int m) {
  require_positive(t, "stretching stiffness");
  require_positive(b, "bending stiffness");
  require_positive(r, "strut length");
  if (m < 1) throw DomainError("elements per strut must be at least 1");
  const double le = r / m;
  ElementStiffness k = ElementStiffness::Zero();

  const Eigen::Matrix2d a = axial_relation(t, le);
  const std::array<int, 2> ax{0, 5};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) k(ax[static_cast<std::size_t>(p)], ax[static_cast<std::size_t>(q)]) = a(p, q);

  const Eigen::Matrix4d f = flexural_relation(b, le);
  // v-theta_z bends with the printed signs; w-theta_y has its couplings negated.
  const std::array<int, 4> vz{1, 4, 6, 9};
  const std::array<int, 4> wy{2, 3, 7, 8};
  const std::array<double, 4> flip{1.0, -1.0, 1.0, -1.0};
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t q = 0; q < 4; ++q) {
      k(vz[p], vz[q]) = f(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      k(wy[p], wy[q]) = flip[p] * flip[q] * f(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  return k;
}

ElementStiffness12 element_stiffness_extended(double t, double b, double r, int m,
                                              std::optional<double> torsion_rigidity) {
  const ElementStiffness k10 = element_stiffness_local(t, b, r, m);
  static constexpr std::array<int, 10> map{0, 1, 2, 4, 5, 6, 7, 8, 10, 11};
  ElementStiffness12 k = ElementStiffness12::Zero();
  for (std::size_t p = 0; p < 10; ++p)
    for (std::size_t q = 0; q < 10; ++q)
      k(map[p], map[q]) = k10(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  if (torsion_rigidity) {
    require_positive(*torsion_rigidity, "torsional rigidity");
    const double kt = *torsion_rigidity * m / r;
    k(3, 3) = k(9, 9) = kt;
    k(3, 9) = k(9, 3) = -kt;
  }
  return k;
}

Eigen::Matrix3d local_axes(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (!(len > 0.0)) throw GeometryError("zero-length element");
  const Vec3 x = d / len;
  const Vec3 ref = std::abs(x.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitY();
  const Vec3 y = ref.cross(x).normalized();
  const Vec3 z = x.cross(y);
  Eigen::Matrix3d axes;
  axes.row(0) = x.transpose();
  axes.row(1) = y.transpose();
  axes.row(2) = z.transpose();
  return axes;
}

ElementStiffness12 transformation(const Eigen::Matrix3d& axes) {
  ElementStiffness12 t = ElementStiffness12::Zero();
  for (int k = 0; k < 4; ++k) t.block<3, 3>(3 * k, 3 * k) = axes;
  return t;
}

GlobalSystem assemble_global(const UnitCell& cell, const MechanicsConfig& config) {
  if (config.m < 1) throw DomainError("elements per strut must be at least 1");
  GlobalSystem sys;
  sys.cell_nodes = cell.nodes.size();
  for (const auto& node : cell.nodes) sys.positions.push_back(node.position);

  for (const auto& s : cell.struts) {
    const Vec3& a = cell.position(s.i);
    const Vec3& b = cell.position(s.j);
    std::vector<int> chain{s.i - 1};
    for (int station = 1; station < config.m; ++station) {
      chain.push_back(static_cast<int>(sys.positions.size()));
      sys.positions.push_back(a + (static_cast<double>(station) / config.m) * (b - a));
    }
    chain.push_back(s.j - 1);
    sys.strut_chains.push_back(std::move(chain));
  }

  const auto dofs = static_cast<Eigen::Index>(6 * sys.positions.size());
  sys.K = Matrix::Zero(dofs, dofs);
  sys.torsion_singular = config.torsion == TorsionPadding::Off && !cell.struts.empty();

  for (std::size_t k = 0; k < cell.struts.size(); ++k) {
    const Strut& s = cell.struts[k];
    const Vec3& a = cell.position(s.i);
    const Vec3& b = cell.position(s.j);
    std::optional<double> gj;
    if (config.torsion == TorsionPadding::Circular) {
      const double nu = s.spec && s.spec->material.poisson_ratio ? *s.spec->material.poisson_ratio : config.poisson_ratio;
      gj = s.bend_stiffness / (1.0 + nu);  // G J with G = E / 2(1 + nu), J = 2 I
    }
    const ElementStiffness12 kl = element_stiffness_extended(s.stretch_stiffness, s.bend_stiffness, (b - a).norm(),
                                                             config.m, gj);
    const ElementStiffness12 t = transformation(local_axes(a, b));
    const ElementStiffness12 kg = t.transpose() * kl * t;
    const auto& chain = sys.strut_chains[k];
    for (std::size_t e = 0; e + 1 < chain.size(); ++e) {
      const std::array<int, 2> ends{chain[e], chain[e + 1]};
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          sys.K.block<6, 6>(GlobalSystem::dof(ends[static_cast<std::size_t>(p)], 0),
                            GlobalSystem::dof(ends[static_cast<std::size_t>(q)], 0)) += kg.block<6, 6>(6 * p, 6 * q);
    }
  }
  return sys;
}

SingularSystemError::SingularSystemError(const std::string& what, std::vector<Eigen::VectorXd> modes)
    : Error(what), null_vectors(std::move(modes)) {}

StaticSolution solve_static(const Matrix& K, const std::vector<Constraint>& constraints, const Eigen::VectorXd& loads,
                            double solver_tolerance) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || loads.size() != n) throw DimensionError("K and load vector sizes differ");
  std::vector<int> fixed(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (const auto& c : constraints) {
    if (c.dof < 0 || c.dof >= n) throw DomainError("constrained DOF " + std::to_string(c.dof) + " is out of range");
    if (fixed[static_cast<std::size_t>(c.dof)]) throw DomainError("DOF " + std::to_string(c.dof) + " constrained twice");
    fixed[static_cast<std::size_t>(c.dof)] = 1;
    u[c.dof] = c.value;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  const auto nf = static_cast<Eigen::Index>(free.size());

  StaticSolution out;
  if (nf > 0) {
    Eigen::MatrixXd kff(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      rhs[a] = loads[free[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < nf; ++b) kff(a, b) = K(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
    rhs -= (K * u)(free);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(kff);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    const double scale = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) || pivots.minCoeff() <= 1e-11 * scale) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kff);
      const Eigen::VectorXd& lambda = eig.eigenvalues();
      const double top = std::max(std::abs(lambda[nf - 1]), std::numeric_limits<double>::min());
      std::vector<Eigen::VectorXd> modes;
      for (Eigen::Index k = 0; k < nf; ++k) {
        if (lambda[k] > 1e-9 * top && !modes.empty()) break;
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (Eigen::Index a = 0; a < nf; ++a) full[free[static_cast<std::size_t>(a)]] = eig.eigenvectors()(a, k);
        modes.push_back(std::move(full));
      }
      throw SingularSystemError("constrained stiffness matrix is singular: " + std::to_string(modes.size()) +
                                    " near-null mode(s), the structure is a mechanism",
                                std::move(modes));
    }
    Eigen::VectorXd x = ldlt.solve(rhs);
    const double target = solver_tolerance * std::max(rhs.norm(), std::numeric_limits<double>::min());
    for (int it = 0; it < 4; ++it) {
      const Eigen::VectorXd r = rhs - kff * x;
      if (r.norm() <= target) break;
      x += ldlt.solve(r);
    }
    out.residual = (rhs - kff * x).norm();
    for (Eigen::Index a = 0; a < nf; ++a) u[free[static_cast<std::size_t>(a)]] = x[a];
  }
  out.displacements = u;
  out.reactions = K * u - loads;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) out.reactions[i] = 0.0;
  return out;
}

}  // namespace lattice::mechanics

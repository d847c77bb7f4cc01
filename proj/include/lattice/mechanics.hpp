#pragma once

#include "lattice/core.hpp"

#include <optional>
#include <vector>

namespace lattice::mechanics {

enum class TorsionPadding { Off, Circular };

struct MechanicsConfig {
  int m = 1;  ///< elements per strut
  TorsionPadding torsion = TorsionPadding::Circular;
  /// Used for struts without a material Poisson ratio.
  double poisson_ratio = 0.3;
  double solver_tolerance = 1e-12;
};

Eigen::Matrix2d axial_relation(double t, double r);

/// Over (v_i, theta_i, v_j, theta_j).
Eigen::Matrix4d flexural_relation(double b, double r);

/// Local DOFs (u, v, w, theta_y, theta_z) for each end.
using ElementStiffness = Eigen::Matrix<double, 10, 10>;
using ElementStiffness12 = Eigen::Matrix<double, 12, 12>;

/// One of m equal elements of a strut of length r.
ElementStiffness element_stiffness_local(double t, double b, double r, int m);

/// The 10x10 element embedded in (u, v, w, theta_x, theta_y, theta_z) per end,
/// with a torsion spring torsion_rigidity / (r/m) on theta_x when given.
ElementStiffness12 element_stiffness_extended(double t, double b, double r, int m,
                                              std::optional<double> torsion_rigidity);

/// Rows are the local x (along a->b), y and z axes in global coordinates.
Eigen::Matrix3d local_axes(const Vec3& a, const Vec3& b);

/// T with u_local = T u_global for a 12-DOF element.
ElementStiffness12 transformation(const Eigen::Matrix3d& axes);

struct GlobalSystem {
  Matrix K;                       ///< 6 DOF per node: u_x, u_y, u_z, theta_x, theta_y, theta_z
  std::vector<Vec3> positions;    ///< cell nodes first, then interior stations
  std::size_t cell_nodes = 0;
  /// Global node chain (0-based) of each strut, end to end, m + 1 long.
  std::vector<std::vector<int>> strut_chains;
  /// True when theta_x is unpadded: rotations about strut axes are mechanisms.
  bool torsion_singular = false;

  std::size_t dof_count() const { return static_cast<std::size_t>(K.rows()); }
  static Eigen::Index dof(int node, int component) { return 6 * static_cast<Eigen::Index>(node) + component; }
};

GlobalSystem assemble_global(const UnitCell& cell, const MechanicsConfig& config = {});

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, std::vector<Eigen::VectorXd> modes);
  /// Near-null vectors of the constrained system, expanded to all DOFs.
  std::vector<Eigen::VectorXd> null_vectors;
};

struct Constraint {
  Eigen::Index dof = 0;
  double value = 0.0;
};

struct StaticSolution {
  Eigen::VectorXd displacements;
  Eigen::VectorXd reactions;  ///< K u - f, nonzero only at constrained DOFs
  double residual = 0.0;      ///< |K_ff u_f - f_f| on the free DOFs
};

StaticSolution solve_static(const Matrix& K, const std::vector<Constraint>& constraints, const Eigen::VectorXd& loads,
                            double solver_tolerance = 1e-12);

}  // namespace lattice::mechanics

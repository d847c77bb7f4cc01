#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lattice {

// Dense row-major storage for every descriptor matrix.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec3 = Eigen::Vector3d;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised for x/0 with x != 0. The 0/0 case is not an error; it yields omega.
class IllPosedDivisionError : public Error {
 public:
  IllPosedDivisionError(std::size_t row, std::size_t col);
  std::size_t row;  ///< 1-based
  std::size_t col;  ///< 1-based
};

/// Structural (matrix-level) invariant failure of a DescriptorSet or UnitCell.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class RepeatedNodesError : public Error {
 public:
  RepeatedNodesError(int a, int b);
  int first;
  int second;
};

class DuplicateStrutError : public Error {
 public:
  DuplicateStrutError(int a, int b);
  int first;
  int second;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Material {
  double youngs_modulus = 0.0;  ///< E_s, Pa
  double density = 0.0;         ///< rho_s, kg/m^3
  std::optional<double> poisson_ratio;  ///< only consulted for torsion padding
};

/// Throws DomainError unless E > 0, rho > 0 and -1 < nu < 0.5.
void check_material(const Material& material);

struct CircularSection {
  double radius = 0.0;
};

struct ExplicitSection {
  double area = 0.0;
  double second_moment = 0.0;
  double linear_density = 0.0;
};

using StrutSection = std::variant<CircularSection, ExplicitSection>;

/// Where a strut's stiffness/density values came from, kept so that files
/// can be written back in the form they were read.
struct StrutSpec {
  StrutSection section;
  Material material;
};

struct Node {
  int id = 0;  ///< 1-based
  Vec3 position = Vec3::Zero();
};

struct Strut {
  int i = 0;
  int j = 0;
  double stretch_stiffness = 0.0;  ///< t = E A, N
  double bend_stiffness = 0.0;     ///< b = E I, N m^2
  double linear_density = 0.0;     ///< lambda, kg/m
  std::optional<StrutSpec> spec;
};

struct UnitCell {
  std::vector<Node> nodes;
  std::vector<Strut> struts;
  Vec3 obb_lengths = Vec3::Zero();

  std::size_t size() const { return nodes.size(); }
  const Vec3& position(int id) const { return nodes.at(static_cast<std::size_t>(id - 1)).position; }
};

/// Default position tolerance for a cell: 1e-9 * max(L_d).
double default_position_tolerance(const UnitCell& cell);

/// Verifies the UnitCell invariants: ids exactly 1..n in order, positions
/// inside the OBB within `tolerance`, strut endpoints exist, i != j,
/// positive strut properties, no duplicate endpoint pair.
/// Throws InvalidInputError / DuplicateStrutError / DimensionError.
void check_cell(const UnitCell& cell, double tolerance);

struct DescriptorSet {
  Matrix G;   ///< geometry, m
  Matrix D;   ///< linear density, kg/m
  Matrix Kt;  ///< stretching stiffness, N
  Matrix Kb;  ///< bending stiffness, N m^2
  IntMatrix P;  ///< packing, entries in {-3..3}

  std::size_t size() const { return static_cast<std::size_t>(G.rows()); }
};

/// Matrix-level checks that must hold before any rule runs: square and equal
/// shapes, symmetric hollow G/D/Kt/Kb, nonnegative entries, shared support of
/// D/Kt/Kb, skew-symmetric P with |p| <= 3. Positivity of off-diagonal G is a
/// validator rule (repeated nodes) and is not enforced here.
/// Throws InvalidInputError describing the first failure.
void check_structure(const DescriptorSet& desc);

/// Largest finite entry of a matrix (0 for empty / all non-finite).
double max_finite(const Matrix& m);

// ---------------------------------------------------------------------------
// Extended matrices: entries are finite values or omega ("undefined").
// ---------------------------------------------------------------------------

class ExtendedMatrix {
 public:
  ExtendedMatrix() = default;
  ExtendedMatrix(Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  bool is_omega(Eigen::Index i, Eigen::Index j) const { return !defined_[index(i, j)]; }
  std::optional<double> at(Eigen::Index i, Eigen::Index j) const;
  /// Throws DomainError when the entry is omega.
  double value(Eigen::Index i, Eigen::Index j) const;

  void set(Eigen::Index i, Eigen::Index j, double v);
  void set_omega(Eigen::Index i, Eigen::Index j);

  bool operator==(const ExtendedMatrix& other) const = default;

 private:
  std::size_t index(Eigen::Index i, Eigen::Index j) const;

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<double> values_;
  std::vector<bool> defined_;
};

Matrix hadamard_product(const Matrix& a, const Matrix& b);

/// Entrywise a/b; 0/0 gives omega, x/0 with x != 0 throws IllPosedDivisionError.
ExtendedMatrix hadamard_div(const Matrix& a, const Matrix& b);

double entrywise_l1(const Matrix& a);
std::size_t entrywise_l0(const Matrix& a);
std::size_t entrywise_l0(const IntMatrix& a);

}  // namespace lattice

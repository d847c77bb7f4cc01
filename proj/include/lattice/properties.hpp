#pragma once

#include "lattice/core.hpp"

#include <optional>

namespace lattice::properties {

/// An odd number of nonzeros in D: symmetry is broken.
class CorruptMatrixError : public Error {
 public:
  using Error::Error;
};

class NotFullyPeriodicError : public Error {
 public:
  using Error::Error;
};

struct Counts {
  std::size_t s = 0;  ///< nodes
  std::size_t e = 0;  ///< struts
  double Z = 0.0;     ///< mean struts per node, 2e/s
};

Counts counts(const Matrix& D);

/// W = |G o D|_1 / 2, kg.
double weight(const Matrix& G, const Matrix& D);

struct Density {
  double rho = 0.0;
  std::optional<double> relative;  ///< rho / rho_s when rho_s is given
  Vec3 axis_lengths = Vec3::Zero();  ///< r_1, r_2, r_3 used in the denominator
};

/// rho = |G o D|_1 / (2 r_1 r_2 r_3) with r_k read from the first row-major
/// pair of P on axis k. All pairs of an axis must agree within
/// `length_tolerance` (default 1e-9 * max(G)).
Density density(const Matrix& G, const Matrix& D, const IntMatrix& P, std::optional<double> parent_density = {},
                std::optional<double> length_tolerance = {});

struct CoefficientMatrices {
  ExtendedMatrix stretch;  ///< C^et = Kt / G, N/m
  ExtendedMatrix bend1;    ///< C_1 = Kb / G, N m
  ExtendedMatrix bend2;    ///< C_2 = Kb / G^2, N
  ExtendedMatrix bend3;    ///< C_3 = Kb / G^3, N/m
};

CoefficientMatrices coefficient_matrices(const Matrix& G, const Matrix& Kt, const Matrix& Kb);

struct PropertySummary {
  Counts counts;
  double W = 0.0;
  std::optional<double> rho;           ///< absent unless three axes are periodic
  std::optional<double> relative_rho;
};

/// Counts and weight always; density when the cell is fully periodic.
PropertySummary summarize(const DescriptorSet& desc, std::optional<double> parent_density = {});

}  // namespace lattice::properties

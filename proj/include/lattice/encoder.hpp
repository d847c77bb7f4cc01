#pragma once

#include "lattice/core.hpp"

#include <optional>

namespace lattice::encoder {

struct EncodeConfig {
  /// Defaults to 1e-9 * max(L_d) of the cell being encoded.
  std::optional<double> position_tolerance;
  bool run_validation = true;

  double tolerance_for(const UnitCell& cell) const;
};

struct StrutProperties {
  double linear_density = 0.0;     ///< lambda = pi rho_s R^2
  double stretch_stiffness = 0.0;  ///< t = pi E_s R^2
  double bend_stiffness = 0.0;     ///< b = pi E_s R^4 / 4
};

StrutProperties circular_strut_properties(double radius, const Material& material);

/// Properties of either section kind. Explicit sections use t = E A, b = E I and
/// their own linear density.
StrutProperties section_properties(const StrutSection& section, const Material& material);

Strut make_strut(int i, int j, const StrutSection& section, const Material& material);

/// Plain pairwise Euclidean distances, no rule checks.
Matrix pairwise_distances(const UnitCell& cell);

/// G with G_ij = |p_i - p_j|. Throws RepeatedNodesError for coincident nodes.
Matrix encode_geometry(const UnitCell& cell, double position_tolerance);

struct StrutMatrices {
  Matrix density;
  Matrix stretch;
  Matrix bend;
};

/// D, Kt, Kb. Throws DuplicateStrutError if a pair is connected twice.
StrutMatrices encode_struts(const UnitCell& cell);

/// P_ij = +d iff p_j - p_i = L_d e_d componentwise within tolerance.
IntMatrix encode_packing(const UnitCell& cell, double position_tolerance);

/// Full descriptor set. With run_validation the validator must return a clean
/// report, otherwise validator::ValidationFailed is thrown carrying it.
DescriptorSet encode(const UnitCell& cell, const EncodeConfig& config = {});

/// Every nonzero of D becomes 1.
IntMatrix adjacency(const Matrix& density);

}  // namespace lattice::encoder

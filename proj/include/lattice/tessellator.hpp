#pragma once

#include "lattice/core.hpp"

#include <array>
#include <optional>
#include <vector>

namespace lattice::tessellator {

/// Two copies contribute the same strut with different properties.
class InconsistentTilingError : public Error {
 public:
  using Error::Error;
};

struct Tessellation {
  std::array<int, 3> dims{1, 1, 1};
  Vec3 cell_lengths = Vec3::Zero();
  std::vector<Vec3> nodes;
  std::vector<Strut> struts;  ///< 1-based global ids, i < j
  /// node_map[c][k] is the global id of local node k + 1 in copy c, where
  /// c = m1 + M1 (m2 + M2 m3).
  std::vector<std::vector<int>> node_map;

  std::size_t s() const { return nodes.size(); }
  std::size_t e() const { return struts.size(); }
  double Z() const { return nodes.empty() ? 0.0 : 2.0 * static_cast<double>(struts.size()) / static_cast<double>(nodes.size()); }

  /// The merged structure as a cell with OBB (M1 L1, M2 L2, M3 L3).
  UnitCell to_cell() const;
};

/// Tiles `cell` M1 x M2 x M3 times. Every axis with M_d > 1 must be periodic.
/// `merge_tolerance` defaults to the cell's position tolerance.
Tessellation tessellate(const UnitCell& cell, const std::array<int, 3>& dims,
                        std::optional<double> merge_tolerance = {});

}  // namespace lattice::tessellator

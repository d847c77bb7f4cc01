#pragma once

#include "lattice/core.hpp"

#include <vector>

namespace fixtures {

using lattice::Material;
using lattice::StrutSection;
using lattice::UnitCell;
using lattice::Vec3;

/// Unit values: lambda = t = b = 1 for every strut.
StrutSection unit_section();
Material unit_material();

struct Build {
  std::vector<Vec3> positions;
  std::vector<std::pair<int, int>> struts;  // 1-based
  Vec3 obb{1.0, 1.0, 1.0};
};

UnitCell make_cell(const Build& b, const StrutSection& section = unit_section(), const Material& material = unit_material());

/// Edge length 2a; node labels as in the golden table.
UnitCell sc(double two_a = 1.0, const StrutSection& section = unit_section(), const Material& material = unit_material());
/// Body centre is node 1, corners 2..9 in the SC order.
UnitCell bcc(double two_a = 1.0, const StrutSection& section = unit_section(), const Material& material = unit_material());
/// 8 corners and 6 face centres, labeled in (x, y, z) lexicographic order.
UnitCell fcc(double two_a = 1.0, const StrutSection& section = unit_section(), const Material& material = unit_material());
/// FCC plus the 12 edges of the face-centre octahedron.
UnitCell octet(double two_a = 1.0);
/// Square base in z = 0 with apex above its centre; periodic along x and y only.
UnitCell pyramid();

UnitCell repeated_nodes_cell();
UnitCell isolated_node_cell();
UnitCell isolated_strut_cell();
UnitCell isolated_subpart_cell();
UnitCell not_periodic_cell();

/// Same structure, node k+1 of `cell` becomes node labels[k].
UnitCell relabeled(const UnitCell& cell, const std::vector<int>& labels);

}  // namespace fixtures

#include "fixtures.hpp"

#include "lattice/encoder.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace fixtures {

StrutSection unit_section() { return lattice::ExplicitSection{1.0, 1.0, 1.0}; }
Material unit_material() { return {1.0, 1.0, std::nullopt}; }

UnitCell make_cell(const Build& b, const StrutSection& section, const Material& material) {
  UnitCell cell;
  cell.obb_lengths = b.obb;
  for (std::size_t k = 0; k < b.positions.size(); ++k) cell.nodes.push_back({static_cast<int>(k + 1), b.positions[k]});
  for (auto [i, j] : b.struts) cell.struts.push_back(lattice::encoder::make_strut(i, j, section, material));
  return cell;
}

namespace {

// SC corners in table order: z first, then x, then y.
std::vector<Vec3> sc_corners(double s) {
  return {{0, 0, 0}, {0, s, 0}, {s, 0, 0}, {s, s, 0}, {0, 0, s}, {0, s, s}, {s, 0, s}, {s, s, s}};
}

const std::vector<std::pair<int, int>> kScEdges{{1, 2}, {1, 3}, {1, 5}, {2, 4}, {2, 6}, {3, 4},
                                                {3, 7}, {4, 8}, {5, 6}, {5, 7}, {6, 8}, {7, 8}};

std::vector<Vec3> fcc_points(double s) {
  std::vector<Vec3> p;
  for (double x : {0.0, s})
    for (double y : {0.0, s})
      for (double z : {0.0, s}) p.emplace_back(x, y, z);
  const double h = s / 2;
  p.emplace_back(h, h, 0);
  p.emplace_back(h, h, s);
  p.emplace_back(h, 0, h);
  p.emplace_back(h, s, h);
  p.emplace_back(0, h, h);
  p.emplace_back(s, h, h);
  std::sort(p.begin(), p.end(), [](const Vec3& a, const Vec3& b) {
    return std::array{a.x(), a.y(), a.z()} < std::array{b.x(), b.y(), b.z()};
  });
  return p;
}

bool is_face_centre(const Vec3& p, double s) {
  int halves = 0;
  for (int d = 0; d < 3; ++d) halves += std::abs(p[d] - s / 2) < 1e-12 * s;
  return halves == 2;
}

Build fcc_build(double s, bool octahedron) {
  Build b;
  b.obb = {s, s, s};
  b.positions = fcc_points(s);
  const auto n = static_cast<int>(b.positions.size());
  const double half_diagonal = s / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec3& p = b.positions[static_cast<std::size_t>(i)];
      const Vec3& q = b.positions[static_cast<std::size_t>(j)];
      const bool fi = is_face_centre(p, s);
      const bool fj = is_face_centre(q, s);
      const bool close = std::abs((p - q).norm() - half_diagonal) < 1e-12 * s;
      // Half face diagonals join a face centre to the corners of its face.
      if (fi != fj && close) b.struts.emplace_back(i + 1, j + 1);
      if (octahedron && fi && fj && close) b.struts.emplace_back(i + 1, j + 1);
    }
  return b;
}

}  // namespace

UnitCell sc(double two_a, const StrutSection& section, const Material& material) {
  return make_cell({sc_corners(two_a), kScEdges, {two_a, two_a, two_a}}, section, material);
}

UnitCell bcc(double two_a, const StrutSection& section, const Material& material) {
  Build b;
  b.obb = {two_a, two_a, two_a};
  b.positions.push_back(Vec3::Constant(two_a / 2));
  for (const auto& c : sc_corners(two_a)) b.positions.push_back(c);
  for (int k = 2; k <= 9; ++k) b.struts.emplace_back(1, k);
  return make_cell(b, section, material);
}

UnitCell fcc(double two_a, const StrutSection& section, const Material& material) {
  return make_cell(fcc_build(two_a, false), section, material);
}

UnitCell octet(double two_a) { return make_cell(fcc_build(two_a, true)); }

UnitCell pyramid() {
  Build b;
  b.obb = {1.0, 1.0, 0.5};
  b.positions = {{0, 0, 0}, {0, 1, 0}, {0.5, 0.5, 0.5}, {1, 0, 0}, {1, 1, 0}};
  b.struts = {{1, 2}, {1, 4}, {2, 5}, {4, 5}, {1, 3}, {2, 3}, {3, 4}, {3, 5}};
  return make_cell(b);
}

UnitCell repeated_nodes_cell() {
  // The (0,0,1) corner appears twice, as nodes 5 and 6; its three edges are shared out between them.
  Build b;
  b.positions = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}, {0, 0, 1}, {0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
  b.struts = {{1, 2}, {1, 3}, {1, 5}, {2, 4}, {2, 7}, {3, 4}, {3, 8}, {4, 9}, {5, 7}, {6, 8}, {7, 9}, {8, 9}};
  return make_cell(b);
}

UnitCell isolated_node_cell() {
  Build b;
  b.positions = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}, {0.5, 0.5, 0.5}, {0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
  auto shift = [](int k) { return k >= 5 ? k + 1 : k; };
  for (auto [i, j] : kScEdges) b.struts.emplace_back(shift(i), shift(j));
  return make_cell(b);
}

UnitCell isolated_strut_cell() {
  Build b;
  b.positions = {{0, 0, 0}, {0, 1, 0}, {0.25, 0.5, 0.5}, {1, 0, 0}, {0.75, 0.5, 0.5},
                 {1, 1, 0}, {0, 0, 1}, {0, 1, 1},       {1, 0, 1}, {1, 1, 1}};
  const std::array<int, 9> corner_id{0, 1, 2, 4, 6, 7, 8, 9, 10};
  for (auto [i, j] : kScEdges)
    b.struts.emplace_back(corner_id[static_cast<std::size_t>(i)], corner_id[static_cast<std::size_t>(j)]);
  b.struts.emplace_back(3, 5);
  return make_cell(b);
}

UnitCell isolated_subpart_cell() {
  Build b;
  b.positions = {{0, 0, 0}, {1, 1, 1}, {1, 0, 0}, {0, 1, 1}, {0, 1, 0}, {1, 0, 1}, {0, 0, 1}, {0.5, 0.5, 0}, {1, 1, 0}};
  b.struts = {{1, 3}, {1, 5}, {1, 7}, {1, 8}, {2, 4}, {2, 6}, {2, 9}};
  return make_cell(b);
}

UnitCell not_periodic_cell() {
  Build b;
  b.positions = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  b.struts = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}};
  return make_cell(b);
}

UnitCell relabeled(const UnitCell& cell, const std::vector<int>& labels) {
  UnitCell out;
  out.obb_lengths = cell.obb_lengths;
  out.nodes.resize(cell.nodes.size());
  for (std::size_t k = 0; k < cell.nodes.size(); ++k) {
    const auto target = static_cast<std::size_t>(labels[k] - 1);
    out.nodes[target] = {labels[k], cell.nodes[k].position};
  }
  for (auto s : cell.struts) {
    const int a = labels[static_cast<std::size_t>(s.i - 1)];
    const int b = labels[static_cast<std::size_t>(s.j - 1)];
    s.i = std::min(a, b);
    s.j = std::max(a, b);
    out.struts.push_back(s);
  }
  return out;
}

}  // namespace fixtures

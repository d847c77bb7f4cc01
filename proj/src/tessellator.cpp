#include "lattice/tessellator.hpp"

#include "lattice/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace lattice::tessellator {

UnitCell Tessellation::to_cell() const {
  UnitCell cell;
  for (std::size_t k = 0; k < nodes.size(); ++k) cell.nodes.push_back({static_cast<int>(k + 1), nodes[k]});
  cell.struts = struts;
  for (int d = 0; d < 3; ++d) cell.obb_lengths[d] = dims[static_cast<std::size_t>(d)] * cell_lengths[d];
  return cell;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  // The smaller index stays the root, so each set is represented by its first-seen point.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
  }
};

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

Tessellation tessellate(const UnitCell& cell, const std::array<int, 3>& dims, std::optional<double> merge_tolerance) {
  for (int m : dims)
    if (m < 1) throw DomainError("tiling counts must be positive");
  const double eps = merge_tolerance ? *merge_tolerance : default_position_tolerance(cell);
  if (!(eps > 0.0)) throw DomainError("merge tolerance must be positive");
  check_cell(cell, eps);

  const IntMatrix P = encoder::encode_packing(cell, eps);
  for (int d = 0; d < 3; ++d) {
    if (dims[static_cast<std::size_t>(d)] == 1) continue;
    if ((P.array() == d + 1).count() == 0)
      throw DomainError("cell is not periodic along axis " + std::to_string(d + 1) + "; cannot tile it there");
  }

  const std::size_t n = cell.nodes.size();
  const std::size_t copies = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<Vec3> points;
  std::vector<std::size_t> copy_of;
  points.reserve(copies * n);
  for (int m3 = 0; m3 < dims[2]; ++m3)
    for (int m2 = 0; m2 < dims[1]; ++m2)
      for (int m1 = 0; m1 < dims[0]; ++m1) {
        const Vec3 offset(m1 * cell.obb_lengths[0], m2 * cell.obb_lengths[1], m3 * cell.obb_lengths[2]);
        for (const auto& node : cell.nodes) {
          points.push_back(node.position + offset);
          copy_of.push_back(static_cast<std::size_t>(m1 + dims[0] * (m2 + dims[1] * m3)));
        }
      }

  DisjointSets sets(points.size());
  std::map<std::array<long long, 3>, std::vector<int>> buckets;
  auto key_of = [&](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(p[0] / eps)),
                                    static_cast<long long>(std::floor(p[1] / eps)),
                                    static_cast<long long>(std::floor(p[2] / eps))};
  };
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto key = key_of(points[q]);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          const auto it = buckets.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == buckets.end()) continue;
          for (int other : it->second)
            if ((points[static_cast<std::size_t>(other)] - points[q]).norm() <= eps) sets.unite(other, static_cast<int>(q));
        }
    buckets[key].push_back(static_cast<int>(q));
  }

  Tessellation out;
  out.dims = dims;
  out.cell_lengths = cell.obb_lengths;
  out.node_map.assign(copies, std::vector<int>(n, 0));
  std::vector<int> global_of_root(points.size(), 0);
  std::vector<std::size_t> copy_of_root(points.size(), copies);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto root = static_cast<std::size_t>(sets.find(static_cast<int>(q)));
    if (global_of_root[root] == 0) {
      out.nodes.push_back(points[root]);
      global_of_root[root] = static_cast<int>(out.nodes.size());
    }
    out.node_map[copy_of[q]][q % n] = global_of_root[root];
  }
  for (std::size_t c = 0; c < copies; ++c) {
    std::vector<int> ids = out.node_map[c];
    std::sort(ids.begin(), ids.end());
    if (const auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end())
      throw GeometryError("merge tolerance " + std::to_string(eps) + " merges two distinct nodes of one cell copy");
  }

  std::map<std::pair<int, int>, std::size_t> seen;
  for (std::size_t c = 0; c < copies; ++c)
    for (const auto& s : cell.struts) {
      const int a = out.node_map[c][static_cast<std::size_t>(s.i - 1)];
      const int b = out.node_map[c][static_cast<std::size_t>(s.j - 1)];
      const std::pair key{std::min(a, b), std::max(a, b)};
      if (const auto it = seen.find(key); it != seen.end()) {
        const Strut& prev = out.struts[it->second];
        if (!close(prev.linear_density, s.linear_density) || !close(prev.stretch_stiffness, s.stretch_stiffness) ||
            !close(prev.bend_stiffness, s.bend_stiffness))
          throw InconsistentTilingError("struts overlapping at global nodes " + std::to_string(key.first) + "-" +
                                        std::to_string(key.second) + " have different properties");
        continue;
      }
      Strut g = s;
      g.i = key.first;
      g.j = key.second;
      seen.emplace(key, out.struts.size());
      out.struts.push_back(std::move(g));
    }
  return out;
}

}  // namespace lattice::tessellator

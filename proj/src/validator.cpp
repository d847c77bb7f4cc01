#include "lattice/validator.hpp"

#include "lattice/reconstructor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace lattice::validator {

const char* rule_name(Rule rule) {
  switch (rule) {
    case Rule::RepeatedNodes: return "RepeatedNodes";
    case Rule::IsolatedNode: return "IsolatedNode";
    case Rule::IsolatedStrut: return "IsolatedStrut";
    case Rule::IsolatedSubPart: return "IsolatedSubPart";
    case Rule::StrutIntersection: return "StrutIntersection";
    case Rule::NotEmbeddable: return "NotEmbeddable";
    case Rule::PeriodicityDefect: return "PeriodicityDefect";
  }
  return "Unknown";
}

bool ValidationReport::fired(Rule rule) const {
  return std::any_of(violations.begin(), violations.end(), [rule](const Violation& v) { return v.rule == rule; });
}

std::vector<Rule> ValidationReport::rules() const {
  std::set<Rule> seen;
  for (const auto& v : violations) seen.insert(v.rule);
  return {seen.begin(), seen.end()};
}

namespace {

std::string summarize(const ValidationReport& report) {
  std::ostringstream out;
  out << "validation failed:";
  for (const auto& v : report.violations) out << ' ' << rule_name(v.rule);
  return out.str();
}

}  // namespace

ValidationFailed::ValidationFailed(ValidationReport r) : Error(summarize(r)), report(std::move(r)) {}

std::vector<Violation> check_repeated_nodes(const Matrix& G, double position_tolerance) {
  std::vector<Violation> out;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = i + 1; j < G.cols(); ++j)
      if (G(i, j) < position_tolerance)
        out.push_back({Rule::RepeatedNodes,
                       {static_cast<int>(i + 1), static_cast<int>(j + 1)},
                       {},
                       "zero distance between nodes " + std::to_string(i + 1) + " and " + std::to_string(j + 1)});
  return out;
}

std::vector<Violation> check_isolated_nodes(const Matrix& D) {
  std::vector<Violation> out;
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    if ((D.row(i).array() == 0.0).all())
      out.push_back({Rule::IsolatedNode, {static_cast<int>(i + 1)}, {}, "all-zero row in D"});
  return out;
}

std::vector<Violation> check_isolated_struts(const Matrix& D) {
  std::vector<Violation> out;
  const Eigen::Index n = D.rows();
  auto links_besides = [&](Eigen::Index row, Eigen::Index partner) {
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != partner && D(row, k) != 0.0) return true;
    return false;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (D(i, j) == 0.0) continue;
      if (!links_besides(i, j) && !links_besides(j, i)) {
        const int a = static_cast<int>(i + 1);
        const int b = static_cast<int>(j + 1);
        out.push_back({Rule::IsolatedStrut, {a, b}, {{a, b}}, "strut has no link to any other strut"});
      }
    }
  }
  return out;
}

std::vector<Violation> check_connected(const Matrix& D, const std::vector<int>& exclude) {
  const Eigen::Index n = D.rows();
  std::vector<bool> skip(static_cast<std::size_t>(n), false);
  for (int id : exclude)
    if (id >= 1 && id <= n) skip[static_cast<std::size_t>(id - 1)] = true;

  Eigen::Index start = 0;
  while (start < n && skip[static_cast<std::size_t>(start)]) ++start;
  if (start == n) return {};

  std::vector<bool> reached(static_cast<std::size_t>(n), false);
  std::deque<Eigen::Index> queue{start};
  reached[static_cast<std::size_t>(start)] = true;
  while (!queue.empty()) {
    const Eigen::Index row = queue.front();
    queue.pop_front();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (D(row, k) != 0.0 && !reached[static_cast<std::size_t>(k)]) {
        reached[static_cast<std::size_t>(k)] = true;
        queue.push_back(k);
      }
    }
  }

  std::vector<int> missing;
  for (Eigen::Index k = 0; k < n; ++k)
    if (!reached[static_cast<std::size_t>(k)] && !skip[static_cast<std::size_t>(k)])
      missing.push_back(static_cast<int>(k + 1));
  if (missing.empty()) return {};
  return {{Rule::IsolatedSubPart, missing, {},
           "nodes not reached from node " + std::to_string(start + 1) + " through the strut network"}};
}

PeriodicityResult check_periodicity(const IntMatrix& P, const Matrix& G, double length_tolerance) {
  PeriodicityResult result;
  std::map<int, std::vector<std::pair<Eigen::Index, Eigen::Index>>> pairs;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (P(i, j) > 0) pairs[P(i, j)].emplace_back(i, j);
  result.periodic_dimension = static_cast<int>(pairs.size());
  if (pairs.empty()) {
    result.violations.push_back(
        {Rule::PeriodicityDefect, {}, {}, "all-zero packing matrix: the cell cannot be periodically arranged"});
    return result;
  }
  for (const auto& [axis, list] : pairs) {
    const double ref = G(list.front().first, list.front().second);
    std::vector<int> off;
    for (const auto& [i, j] : list) {
      if (std::abs(G(i, j) - ref) > length_tolerance) {
        off.push_back(static_cast<int>(i + 1));
        off.push_back(static_cast<int>(j + 1));
      }
    }
    if (!off.empty()) {
      std::sort(off.begin(), off.end());
      off.erase(std::unique(off.begin(), off.end()), off.end());
      result.violations.push_back({Rule::PeriodicityDefect, off, {},
                                   "packing pairs on axis " + std::to_string(axis) + " have unequal lengths"});
    }
  }
  return result;
}

std::vector<Violation> check_embeddable(const Matrix& G, double distance_tolerance) {
  const Eigen::Index n = G.rows();
  if (n <= 2) return {};
  reconstructor::EmbedOptions options;
  options.distance_tolerance = distance_tolerance;
  try {
    (void)reconstructor::embed_nodes(G, options);
    return {};
  } catch (const reconstructor::InconsistentDistanceError& e) {
    return {{Rule::NotEmbeddable, {e.worst_i, e.worst_j}, {}, e.what()}};
  } catch (const reconstructor::DegenerateEmbeddingError&) {
    // All nodes collinear with nodes 1 and 2: check the 1D placement directly.
    const double r12 = G(0, 1);
    if (!(r12 > 0.0)) return {{Rule::NotEmbeddable, {1, 2}, {}, "nodes 1 and 2 coincide"}};
    std::vector<double> x(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < n; ++q)
      x[static_cast<std::size_t>(q)] = (r12 * r12 + G(0, q) * G(0, q) - G(1, q) * G(1, q)) / (2.0 * r12);
    double worst = 0.0;
    int wi = 0, wj = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double res = std::abs(std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]) - G(i, j));
        if (res > worst) {
          worst = res;
          wi = static_cast<int>(i + 1);
          wj = static_cast<int>(j + 1);
        }
      }
    if (worst > distance_tolerance)
      return {{Rule::NotEmbeddable, {wi, wj}, {}, "distance matrix is not realizable in 3D"}};
    return {};
  }
}

// ---------------------------------------------------------------------------

namespace {

// Closest points between segments p1 + s d1 and p2 + t d2, s, t in [0, 1].
// The interior solution is the normal-equation (least-squares) solve of
// [d1, -d2] [s, t]^T = p2 - p1; boundary cases clamp.
struct Closest {
  double s, t, distance;
  Vec3 on_first, on_second;
};

Closest closest_points(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  const double c = d1.dot(r);
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;
  double s = 0.0;
  if (denom > 1e-14 * a * e) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
  double t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  const Vec3 c1 = p1 + s * d1;
  const Vec3 c2 = p2 + t * d2;
  return {s, t, (c1 - c2).norm(), c1, c2};
}

}  // namespace

SegmentContact classify_segments(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                                 std::optional<std::pair<int, int>> shared, double tolerance) {
  const Vec3 u = b - a;
  const Vec3 v = d - c;
  if (u.norm() < tolerance || v.norm() < tolerance) throw GeometryError("zero-length strut");

  if (!shared) {
    const Closest cp = closest_points(a, b, c, d);
    return {cp.distance < tolerance ? Psi::Intersection : Psi::NoIntersection, cp.distance, cp.on_first};
  }

  // Sharing a node, the struts can only meet elsewhere by (near-)collinear
  // overlap. Distance from the node side grows monotonically along the
  // shorter strut, so its far end decides.
  const auto [first_end, second_end] = *shared;
  const Vec3 node = first_end == 0 ? a : b;
  const Vec3 far1 = first_end == 0 ? b : a;
  const Vec3 far2 = second_end == 0 ? d : c;
  const bool first_shorter = u.squaredNorm() <= v.squaredNorm();
  const Vec3 tip = first_shorter ? far1 : far2;
  const Vec3 other = first_shorter ? far2 : far1;
  const Vec3 seg = other - node;
  const double t = std::clamp((tip - node).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
  const double dist = (node + t * seg - tip).norm();
  if (dist < tolerance) return {Psi::Intersection, dist, first_shorter ? tip : Vec3(node + t * seg)};
  return {Psi::NoIntersection, dist, node};
}

IntersectionState::IntersectionState(std::vector<std::pair<int, int>> struts, std::vector<Psi> states,
                                     std::vector<Vec3> contacts)
    : struts_(std::move(struts)), states_(std::move(states)), contacts_(std::move(contacts)) {}

std::optional<std::size_t> IntersectionState::find(int i, int j) const {
  const auto key = std::minmax(i, j);
  for (std::size_t k = 0; k < struts_.size(); ++k)
    if (struts_[k] == std::pair<int, int>(key.first, key.second)) return k;
  return std::nullopt;
}

Psi IntersectionState::state(int i, int j, int i2, int j2) const {
  const auto a = find(i, j);
  const auto b = find(i2, j2);
  if (!a || !b || *a == *b) return Psi::Undefined;
  return at(*a, *b);
}

std::vector<std::pair<std::size_t, std::size_t>> IntersectionState::intersecting() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < struts_.size(); ++a)
    for (std::size_t b = a + 1; b < struts_.size(); ++b)
      if (at(a, b) == Psi::Intersection) out.emplace_back(a, b);
  return out;
}

IntersectionState check_intersections(const UnitCell& cell, double position_tolerance) {
  std::vector<std::pair<int, int>> struts;
  struts.reserve(cell.struts.size());
  for (const Strut& s : cell.struts) {
    const auto key = std::minmax(s.i, s.j);
    struts.emplace_back(key.first, key.second);
  }
  const std::size_t e = struts.size();
  std::vector<Psi> states(e * e, Psi::Undefined);
  std::vector<Vec3> contacts(e * e, Vec3::Zero());
  for (std::size_t p = 0; p < e; ++p) {
    for (std::size_t q = p + 1; q < e; ++q) {
      const auto [i, j] = struts[p];
      const auto [k, l] = struts[q];
      if (std::pair(i, j) == std::pair(k, l)) continue;
      std::optional<std::pair<int, int>> shared;
      if (i == k) shared = {0, 0};
      else if (i == l) shared = {0, 1};
      else if (j == k) shared = {1, 0};
      else if (j == l) shared = {1, 1};
      const SegmentContact contact = classify_segments(cell.position(i), cell.position(j), cell.position(k),
                                                       cell.position(l), shared, position_tolerance);
      states[p * e + q] = states[q * e + p] = contact.state;
      contacts[p * e + q] = contacts[q * e + p] = contact.point;
    }
  }
  return {std::move(struts), std::move(states), std::move(contacts)};
}

namespace {

double point_segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - x).norm();
}

}  // namespace

std::vector<Violation> intersection_violations(const UnitCell& cell, const IntersectionState& state,
                                               double position_tolerance) {
  std::vector<Violation> out;
  const auto& struts = state.struts();
  for (const auto& [p, q] : state.intersecting()) {
    const auto s1 = struts[p];
    const auto s2 = struts[q];
    std::vector<int> nodes;
    auto touches = [&](int node, std::pair<int, int> other) {
      if (node == other.first || node == other.second) return;
      if (point_segment_distance(cell.position(node), cell.position(other.first), cell.position(other.second)) <
          position_tolerance)
        nodes.push_back(node);
    };
    touches(s1.first, s2);
    touches(s1.second, s2);
    touches(s2.first, s1);
    touches(s2.second, s1);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::ostringstream detail;
    detail << "struts (" << s1.first << ", " << s1.second << ") and (" << s2.first << ", " << s2.second
           << ") meet away from a shared node";
    auto pair_list = std::vector<std::pair<int, int>>{s1, s2};
    std::sort(pair_list.begin(), pair_list.end());
    out.push_back({Rule::StrutIntersection, nodes, pair_list, detail.str()});
  }
  return out;
}

ValidationReport validate(const DescriptorSet& desc, const UnitCell* cell, const ValidateConfig& config) {
  check_structure(desc);
  if (cell && cell->size() != desc.size())
    throw DimensionError("cell and descriptor set have different node counts");

  const double gmax = max_finite(desc.G);
  const double eps = config.position_tolerance
                         ? *config.position_tolerance
                         : (cell ? default_position_tolerance(*cell) : 1e-9 * std::max(gmax, 1e-300));
  const double tau = config.distance_tolerance ? *config.distance_tolerance : 1e-6 * gmax;

  ValidationReport report;
  auto append = [&](std::vector<Violation> v) {
    report.violations.insert(report.violations.end(), std::make_move_iterator(v.begin()),
                             std::make_move_iterator(v.end()));
  };

  auto repeated = check_repeated_nodes(desc.G, eps);
  const bool has_repeats = !repeated.empty();
  append(std::move(repeated));

  auto isolated_nodes = check_isolated_nodes(desc.D);
  auto isolated_struts = check_isolated_struts(desc.D);
  std::vector<int> exclude;
  for (const auto& v : isolated_nodes) exclude.insert(exclude.end(), v.nodes.begin(), v.nodes.end());
  for (const auto& v : isolated_struts) exclude.insert(exclude.end(), v.nodes.begin(), v.nodes.end());
  append(std::move(isolated_nodes));
  append(std::move(isolated_struts));
  append(check_connected(desc.D, exclude));

  PeriodicityResult periodicity = check_periodicity(desc.P, desc.G, std::max(tau, eps));
  report.periodic_dimension = periodicity.periodic_dimension;
  append(std::move(periodicity.violations));

  if (!has_repeats) {
    auto embed = check_embeddable(desc.G, tau);
    const bool embeddable = embed.empty();
    append(std::move(embed));
    if (cell) {
      append(intersection_violations(*cell, check_intersections(*cell, eps), eps));
    } else if (embeddable && desc.size() >= 3) {
      try {
        reconstructor::EmbedOptions options;
        options.distance_tolerance = tau;
        const auto embedding = reconstructor::embed_nodes(desc.G, options);
        UnitCell temp = reconstructor::cell_from_embedding(embedding.first, desc);
        append(intersection_violations(temp, check_intersections(temp, eps), eps));
      } catch (const reconstructor::DegenerateEmbeddingError&) {
        // Collinear node sets: every strut lies on one line; reuse the 1D layout.
        UnitCell temp = reconstructor::cell_from_line(desc);
        append(intersection_violations(temp, check_intersections(temp, eps), eps));
      }
    }
  }

  std::sort(report.violations.begin(), report.violations.end());
  return report;
}

}  // namespace lattice::validator

#pragma once

#include "lattice/core.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lattice::validator {

enum class Rule {
  RepeatedNodes,
  IsolatedNode,
  IsolatedStrut,
  IsolatedSubPart,
  StrutIntersection,
  NotEmbeddable,
  PeriodicityDefect,
};

const char* rule_name(Rule rule);

struct Violation {
  Rule rule;
  std::vector<int> nodes;                     ///< 1-based node ids
  std::vector<std::pair<int, int>> struts;    ///< endpoint pairs, i < j
  std::string detail;

  auto operator<=>(const Violation& other) const {
    if (auto c = rule <=> other.rule; c != 0) return c;
    if (auto c = nodes <=> other.nodes; c != 0) return c;
    return struts <=> other.struts;
  }
  bool operator==(const Violation& other) const {
    return rule == other.rule && nodes == other.nodes && struts == other.struts;
  }
};

struct ValidationReport {
  std::vector<Violation> violations;  ///< sorted by rule, then indices
  int periodic_dimension = 0;

  bool clean() const { return violations.empty(); }
  bool fired(Rule rule) const;
  /// Rules that fired, deduplicated, in enum order.
  std::vector<Rule> rules() const;
};

class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report);
  ValidationReport report;
};

struct ValidateConfig {
  /// Defaults to 1e-9 * max(L) with a cell, 1e-9 * max(G) without.
  std::optional<double> position_tolerance;
  /// tau_G; defaults to 1e-6 * max(G).
  std::optional<double> distance_tolerance;
};

std::vector<Violation> check_repeated_nodes(const Matrix& G, double position_tolerance);
std::vector<Violation> check_isolated_nodes(const Matrix& D);
std::vector<Violation> check_isolated_struts(const Matrix& D);

/// Breadth-first growth from node 1 over the nonzero pattern of D. Nodes that
/// are isolated nodes or endpoints of isolated struts are listed in `exclude`
/// (1-based) so they are not reported a second time as a sub-part.
std::vector<Violation> check_connected(const Matrix& D, const std::vector<int>& exclude = {});

struct PeriodicityResult {
  int periodic_dimension = 0;
  std::vector<Violation> violations;
};

/// `length_tolerance` bounds the spread of G over pairs sharing an axis.
PeriodicityResult check_periodicity(const IntMatrix& P, const Matrix& G, double length_tolerance);

std::vector<Violation> check_embeddable(const Matrix& G, double distance_tolerance);

// ---------------------------------------------------------------------------
// Strut intersection
// ---------------------------------------------------------------------------

enum class Psi { NoIntersection = 0, Intersection = 1, Undefined = 2 };

struct SegmentContact {
  Psi state = Psi::NoIntersection;
  double distance = 0.0;  ///< minimum distance between the segments
  Vec3 point = Vec3::Zero();  ///< closest point on the first segment
};

/// Classifies segment [a,b] against [c,d]. `shared` names which endpoints are
/// the same node: {0|1 on the first segment, 0|1 on the second}. Throws
/// GeometryError for a zero-length segment.
SegmentContact classify_segments(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                                 std::optional<std::pair<int, int>> shared, double tolerance);

class IntersectionState {
 public:
  IntersectionState() = default;
  IntersectionState(std::vector<std::pair<int, int>> struts, std::vector<Psi> states, std::vector<Vec3> contacts);

  /// psi(i, j, i', j'); Undefined when either strut is absent or both name the same strut.
  Psi state(int i, int j, int i2, int j2) const;
  const std::vector<std::pair<int, int>>& struts() const { return struts_; }
  /// Intersecting strut-index pairs (0-based indices into struts()).
  std::vector<std::pair<std::size_t, std::size_t>> intersecting() const;
  const Vec3& contact(std::size_t a, std::size_t b) const { return contacts_[a * struts_.size() + b]; }
  Psi at(std::size_t a, std::size_t b) const { return states_[a * struts_.size() + b]; }

 private:
  std::optional<std::size_t> find(int i, int j) const;

  std::vector<std::pair<int, int>> struts_;
  std::vector<Psi> states_;
  std::vector<Vec3> contacts_;
};

IntersectionState check_intersections(const UnitCell& cell, double position_tolerance);

/// StrutIntersection violations from a state; nodes lying on another strut's
/// interior are named together with both struts.
std::vector<Violation> intersection_violations(const UnitCell& cell, const IntersectionState& state,
                                               double position_tolerance);

/// Runs every check. Structural matrix failures throw InvalidInputError before
/// any rule runs. Geometric checks (embeddability, intersections) are skipped
/// when repeated nodes are present, since coordinates are then ambiguous.
/// Intersections use `cell` when given, otherwise the reconstructed embedding.
ValidationReport validate(const DescriptorSet& desc, const UnitCell* cell = nullptr, const ValidateConfig& config = {});

}  // namespace lattice::validator

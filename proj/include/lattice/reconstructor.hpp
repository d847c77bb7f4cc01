#pragma once

#include "lattice/core.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace lattice::reconstructor {

class DegenerateEmbeddingError : public Error {
 public:
  using Error::Error;
};

/// Some entry of G disagrees with every 3D point set consistent with the anchors.
class InconsistentDistanceError : public Error {
 public:
  InconsistentDistanceError(const std::string& what, int i, int j, double residual);
  int worst_i;  ///< 1-based
  int worst_j;
  double residual;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class NonCanonicalLabelingError : public Error {
 public:
  using Error::Error;
};

enum class Chirality { Reference, Mirrored, Achiral };

const char* chirality_name(Chirality c);

using Coordinates = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct EmbeddingResult {
  Coordinates coordinates;
  Chirality chirality = Chirality::Reference;
  double max_residual = 0.0;
  /// 0-based anchor nodes: node 1, node 2, first non-collinear, first non-coplanar (-1 if planar).
  std::array<int, 4> anchors{0, 1, -1, -1};
};

struct EmbedOptions {
  /// tau_G; defaults to 1e-6 * max(G).
  std::optional<double> distance_tolerance;
  /// When false only the anchor-related entries of G are read.
  bool verify = true;
};

/// Trilateration from the first qualifying anchors. Returns the reference
/// (fourth anchor above the u1-u2 plane) and mirrored embeddings; for a planar
/// node set both are equal and tagged Achiral.
std::pair<EmbeddingResult, EmbeddingResult> embed_nodes(const Matrix& G, const EmbedOptions& options = {});

/// The (i < j, 0-based) entries of G the embedding actually reads: the six
/// anchor distances plus four per remaining node, 4n - 10 in general position.
std::vector<std::pair<int, int>> independent_entries(const Matrix& G);

struct FrameRecovery {
  UnitCell cell;                     ///< nodes + OBB, no struts
  std::optional<UnitCell> alternate; ///< other chirality when unresolved
  bool chirality_resolved = false;
  Chirality chosen = Chirality::Reference;
  int periodic_dimension = 0;
};

/// Aligns the embedding with the packing directions. With three periodic axes
/// the right-handed embedding is chosen; otherwise missing axes are completed
/// right-handedly, their length is the node extent, and both candidates are
/// returned unresolved.
FrameRecovery recover_frame(const std::pair<EmbeddingResult, EmbeddingResult>& embedding, const IntMatrix& P,
                            const Matrix& G, double distance_tolerance);

struct ReconstructConfig {
  std::optional<double> distance_tolerance;  ///< tau_G
  std::optional<double> position_tolerance;  ///< ordering quantum; default 1e-9 * max(G)
  /// Require the given labels to be one of the 48 canonical orderings.
  bool require_canonical_labeling = true;
};

struct Reconstruction {
  UnitCell cell;
  std::optional<UnitCell> alternate;
  bool chirality_resolved = false;
  Chirality chirality = Chirality::Reference;
  int periodic_dimension = 0;
  double max_residual = 0.0;
  /// Index into the 24 canonical frames under which the labels are canonical.
  std::optional<int> matched_frame;
  bool matched_mirrored = false;
};

Reconstruction reconstruct(const DescriptorSet& desc, const ReconstructConfig& config = {});

/// Struts (i < j) instantiated from D, Kt, Kb.
std::vector<Strut> struts_from_descriptors(const DescriptorSet& desc);

/// A cell at the embedding coordinates shifted to the positive octant, with
/// struts from the descriptors. OBB is the node extent.
UnitCell cell_from_embedding(const EmbeddingResult& embedding, const DescriptorSet& desc);

/// Collinear node sets laid out on the first axis.
UnitCell cell_from_line(const DescriptorSet& desc);

}  // namespace lattice::reconstructor

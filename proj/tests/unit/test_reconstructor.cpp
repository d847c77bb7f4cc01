#include "lattice/canonicalizer.hpp"
#include "lattice/encoder.hpp"
#include "lattice/reconstructor.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lattice;
using reconstructor::Chirality;

namespace {

std::vector<Vec3> rows(const reconstructor::Coordinates& x) {
  std::vector<Vec3> out;
  for (Eigen::Index q = 0; q < x.rows(); ++q) out.push_back(x.row(q).transpose());
  return out;
}

double max_position_error(const UnitCell& a, const UnitCell& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.nodes.size(); ++k)
    worst = std::max(worst, (a.nodes[k].position - b.nodes[k].position).norm());
  return worst;
}

}  // namespace

TEST(Embed, ReproducesDistances) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts;
  for (int k = 0; k < 12; ++k) pts.emplace_back(u(rng), u(rng), u(rng));
  const Matrix G = oracles::distances(pts);
  const auto [ref, mirror] = reconstructor::embed_nodes(G);
  EXPECT_LT(oracles::embedding_residual(G, rows(ref.coordinates)), 1e-12);
  EXPECT_LT(oracles::embedding_residual(G, rows(mirror.coordinates)), 1e-12);
  EXPECT_EQ(ref.chirality, Chirality::Reference);
  EXPECT_EQ(mirror.chirality, Chirality::Mirrored);
  EXPECT_GT(ref.coordinates(ref.anchors[3], 2), 0.0);
  EXPECT_LT(mirror.coordinates(mirror.anchors[3], 2), 0.0);
}

TEST(Embed, AnchorsSkipCollinearAndCoplanarNodes) {
  // Node 3 is on the line through 1 and 2; node 4 is in their plane with node 5.
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 0, 1}, {0.3, 0.2, 0.7}};
  const Matrix G = oracles::distances(pts);
  const auto [ref, mirror] = reconstructor::embed_nodes(G);
  EXPECT_EQ(ref.anchors, (std::array<int, 4>{0, 1, 3, 5}));
  EXPECT_LT(oracles::embedding_residual(G, rows(ref.coordinates)), 1e-12);
}

TEST(Embed, PlanarSetIsAchiral) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, 0.2, 0}};
  const auto [ref, mirror] = reconstructor::embed_nodes(oracles::distances(pts));
  EXPECT_EQ(ref.chirality, Chirality::Achiral);
  EXPECT_EQ(ref.anchors[3], -1);
  EXPECT_TRUE(ref.coordinates.col(2).isZero());
}

TEST(Embed, TriangleViolation) {
  Matrix G(3, 3);
  G << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  EXPECT_THROW(reconstructor::embed_nodes(G), reconstructor::InconsistentDistanceError);
}

TEST(Embed, CollinearAndCoincidentAreDegenerate) {
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  EXPECT_THROW(reconstructor::embed_nodes(oracles::distances(line)), reconstructor::DegenerateEmbeddingError);
  const std::vector<Vec3> same{{0, 0, 0}, {0, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(reconstructor::embed_nodes(oracles::distances(same)), reconstructor::DegenerateEmbeddingError);
}

TEST(Embed, InconsistentEntryNamed) {
  const UnitCell cell = fixtures::sc();
  Matrix G = encoder::encode(cell).G;
  G(5, 6) = G(6, 5) = G(5, 6) * 1.01;
  try {
    reconstructor::embed_nodes(G);
    FAIL();
  } catch (const reconstructor::InconsistentDistanceError& e) {
    EXPECT_GT(e.residual, 1e-6);
  }
}

TEST(IndependentEntries, CountIsFourNMinusTen) {
  for (const auto& cell : {fixtures::sc(), fixtures::bcc(), fixtures::fcc(), fixtures::octet()}) {
    const Matrix G = encoder::encode(cell).G;
    const auto entries = reconstructor::independent_entries(G);
    EXPECT_EQ(entries.size(), 4 * cell.size() - 10);
  }
}

TEST(IndependentEntries, MaskedMatrixGivesSameEmbedding) {
  const Matrix G = encoder::encode(fixtures::fcc()).G;
  Matrix masked = Matrix::Constant(G.rows(), G.cols(), std::nan(""));
  masked.diagonal().setZero();
  for (auto [i, j] : reconstructor::independent_entries(G)) masked(i, j) = masked(j, i) = G(i, j);
  reconstructor::EmbedOptions opt;
  opt.verify = false;
  opt.distance_tolerance = 1e-6;
  const auto full = reconstructor::embed_nodes(G);
  const auto part = reconstructor::embed_nodes(masked, opt);
  EXPECT_LT((full.first.coordinates - part.first.coordinates).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reconstruct, FixturesRoundTrip) {
  for (const auto& cell : {fixtures::sc(2.0), fixtures::fcc(1.0), fixtures::octet(3.0)}) {
    const DescriptorSet d = encoder::encode(cell);
    const auto rec = reconstructor::reconstruct(d);
    EXPECT_TRUE(rec.chirality_resolved);
    EXPECT_EQ(rec.periodic_dimension, 3);
    EXPECT_LT(max_position_error(rec.cell, cell), 1e-9 * d.G.maxCoeff());
    EXPECT_TRUE(rec.cell.obb_lengths.isApprox(cell.obb_lengths, 1e-12));
    const DescriptorSet again = encoder::encode(rec.cell);
    EXPECT_EQ(again.P, d.P);
    EXPECT_EQ(again.D, d.D);
    EXPECT_TRUE(again.G.isApprox(d.G, 1e-12));
  }
}

TEST(Reconstruct, TableLabelingOfSimpleCubicIsCanonical) {
  const auto rec = reconstructor::reconstruct(encoder::encode(fixtures::sc()));
  ASSERT_TRUE(rec.matched_frame.has_value());
  EXPECT_FALSE(rec.matched_mirrored);
}

TEST(Reconstruct, CentreFirstLabelingIsNotCanonical) {
  const DescriptorSet d = encoder::encode(fixtures::bcc());
  EXPECT_THROW(reconstructor::reconstruct(d), reconstructor::NonCanonicalLabelingError);
  reconstructor::ReconstructConfig cfg;
  cfg.require_canonical_labeling = false;
  const auto rec = reconstructor::reconstruct(d, cfg);
  EXPECT_LT(max_position_error(rec.cell, fixtures::bcc()), 1e-9);
}

TEST(Reconstruct, MirrorImageIsRecoveredWithItsHandedness) {
  // A chiral cell: SC with one extra strut on a face diagonal and one interior node.
  UnitCell cell = fixtures::sc();
  cell.struts.push_back(encoder::make_strut(1, 4, fixtures::unit_section(), fixtures::unit_material()));
  UnitCell mirror = cell;
  for (auto& n : mirror.nodes) n.position.x() = 1.0 - n.position.x();
  mirror = canonicalizer::relabel(mirror, canonicalizer::order_nodes(mirror, canonicalizer::FrameTransform{}, 1e-9));
  reconstructor::ReconstructConfig cfg;
  cfg.require_canonical_labeling = false;
  const auto rec = reconstructor::reconstruct(encoder::encode(mirror), cfg);
  EXPECT_LT(max_position_error(rec.cell, mirror), 1e-9);
}

TEST(Reconstruct, PartialPeriodicityLeavesChiralityOpen) {
  const UnitCell cell = fixtures::pyramid();
  reconstructor::ReconstructConfig cfg;
  cfg.require_canonical_labeling = false;
  const auto rec = reconstructor::reconstruct(encoder::encode(cell), cfg);
  EXPECT_EQ(rec.periodic_dimension, 2);
  EXPECT_FALSE(rec.chirality_resolved);
  ASSERT_TRUE(rec.alternate.has_value());
  const double err = std::min(max_position_error(rec.cell, cell), max_position_error(*rec.alternate, cell));
  EXPECT_LT(err, 1e-9);
}

TEST(RecoverFrame, UnequalAxisPairsThrow) {
  DescriptorSet d = encoder::encode(fixtures::sc());
  // Tag the body diagonal (1, 8) as a further axis-1 pair.
  d.P(0, 7) = 1;
  d.P(7, 0) = -1;
  const auto emb = reconstructor::embed_nodes(d.G);
  EXPECT_THROW(reconstructor::recover_frame(emb, d.P, d.G, 1e-6), reconstructor::FrameError);
}

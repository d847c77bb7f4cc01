#include "lattice/properties.hpp"

#include "lattice/reconstructor.hpp"

#include <array>
#include <cmath>

namespace lattice::properties {

Counts counts(const Matrix& D) {
  if (D.rows() != D.cols()) throw DimensionError("D must be square");
  const std::size_t nnz = entrywise_l0(D);
  if (nnz % 2 != 0) throw CorruptMatrixError("D has an odd number of nonzero entries");
  Counts c;
  c.s = static_cast<std::size_t>(D.rows());
  c.e = nnz / 2;
  c.Z = c.s == 0 ? 0.0 : static_cast<double>(nnz) / static_cast<double>(c.s);
  return c;
}

double weight(const Matrix& G, const Matrix& D) { return entrywise_l1(hadamard_product(G, D)) / 2.0; }

Density density(const Matrix& G, const Matrix& D, const IntMatrix& P, std::optional<double> parent_density,
                std::optional<double> length_tolerance) {
  if (P.rows() != G.rows() || P.cols() != G.cols()) throw DimensionError("P and G sizes differ");
  const double tol = length_tolerance ? *length_tolerance : 1e-9 * max_finite(G);
  std::array<std::optional<double>, 3> r;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const int p = P(i, j);
      if (p <= 0) continue;
      auto& slot = r[static_cast<std::size_t>(p - 1)];
      if (!slot) slot = G(i, j);
      else if (std::abs(G(i, j) - *slot) > tol)
        throw reconstructor::FrameError("packing pairs on axis " + std::to_string(p) + " have unequal lengths");
    }
  Density out;
  for (int k = 0; k < 3; ++k) {
    if (!r[static_cast<std::size_t>(k)])
      throw NotFullyPeriodicError("axis " + std::to_string(k + 1) + " has no packing pair; density needs three");
    out.axis_lengths[k] = *r[static_cast<std::size_t>(k)];
  }
  out.rho = entrywise_l1(hadamard_product(G, D)) / (2.0 * out.axis_lengths.prod());
  if (parent_density) {
    if (!(*parent_density > 0.0)) throw DomainError("parent density must be positive");
    out.relative = out.rho / *parent_density;
  }
  return out;
}

CoefficientMatrices coefficient_matrices(const Matrix& G, const Matrix& Kt, const Matrix& Kb) {
  const Matrix G2 = hadamard_product(G, G);
  const Matrix G3 = hadamard_product(G2, G);
  return {hadamard_div(Kt, G), hadamard_div(Kb, G), hadamard_div(Kb, G2), hadamard_div(Kb, G3)};
}

PropertySummary summarize(const DescriptorSet& desc, std::optional<double> parent_density) {
  PropertySummary s;
  s.counts = counts(desc.D);
  s.W = weight(desc.G, desc.D);
  try {
    const Density d = density(desc.G, desc.D, desc.P, parent_density);
    s.rho = d.rho;
    s.relative_rho = d.relative;
  } catch (const NotFullyPeriodicError&) {
  }
  return s;
}

}  // namespace lattice::properties

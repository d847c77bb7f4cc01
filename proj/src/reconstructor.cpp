#include "lattice/reconstructor.hpp"

#include "lattice/canonicalizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lattice::reconstructor {

InconsistentDistanceError::InconsistentDistanceError(const std::string& what, int i, int j, double r)
    : Error(what), worst_i(i), worst_j(j), residual(r) {}

const char* chirality_name(Chirality c) {
  switch (c) {
    case Chirality::Reference: return "reference";
    case Chirality::Mirrored: return "mirrored";
    case Chirality::Achiral: return "achiral";
  }
  return "unknown";
}

namespace {

double cayley_menger_volume(const Matrix& G, const std::array<int, 4>& idx) {
  Eigen::Matrix<double, 5, 5> cm = Eigen::Matrix<double, 5, 5>::Ones();
  cm(0, 0) = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double r = a == b ? 0.0 : G(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
      cm(a + 1, b + 1) = r * r;
    }
  return std::sqrt(std::max(0.0, cm.determinant() / 288.0));
}

double tuple_scale(const Matrix& G, const std::array<int, 4>& idx) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      s = std::max(s, G(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]));
  return s;
}

// Smallest V / s^3 of a non-coplanar 4-tuple, s its longest edge.
constexpr double kCoplanarVolume = 1e-7;

// Node 1, node 2, first node off their line, first node off their plane.
std::array<int, 4> find_anchors(const Matrix& G) {
  const auto n = static_cast<int>(G.rows());
  if (n < 3) throw DegenerateEmbeddingError("fewer than three nodes cannot span a plane");
  const double r12 = G(0, 1);
  if (!(r12 > 0.0)) throw DegenerateEmbeddingError("nodes 1 and 2 coincide");
  std::array<int, 4> anchors{0, 1, -1, -1};
  const double line_tol = 1e-8 * r12;
  for (int q = 2; q < n; ++q) {
    const double a = G(0, q);
    const double b = G(1, q);
    if (std::abs(a + b - r12) > line_tol && std::abs(std::abs(a - b) - r12) > line_tol) {
      anchors[2] = q;
      break;
    }
  }
  if (anchors[2] < 0) throw DegenerateEmbeddingError("all nodes lie on one line");
  for (int q = anchors[2] + 1; q < n; ++q) {
    const std::array<int, 4> tuple{0, 1, anchors[2], q};
    const double scale = tuple_scale(G, tuple);
    if (cayley_menger_volume(G, tuple) > kCoplanarVolume * scale * scale * scale) {
      anchors[3] = q;
      break;
    }
  }
  return anchors;
}

double default_tau(const Matrix& G, const std::optional<double>& tau) {
  if (tau) return *tau;
  return 1e-6 * max_finite(G);
}

}  // namespace

std::pair<EmbeddingResult, EmbeddingResult> embed_nodes(const Matrix& G, const EmbedOptions& options) {
  if (G.rows() != G.cols()) throw DimensionError("G must be square");
  const auto n = static_cast<int>(G.rows());
  const std::array<int, 4> anchors = find_anchors(G);
  const int k = anchors[2];
  const int l = anchors[3];
  const double tau = default_tau(G, options.distance_tolerance);

  const double r12 = G(0, 1);
  const double r1k = G(0, k);
  const double r2k = G(1, k);
  const double xk = (r12 * r12 + r1k * r1k - r2k * r2k) / (2.0 * r12);
  const double yk2 = r1k * r1k - xk * xk;
  if (!(yk2 > 0.0)) {
    // The anchor triangle itself fails the triangle inequality; name its longest side.
    int wi = 1, wj = 2;
    double longest = r12;
    if (r1k > longest) { longest = r1k; wi = 1; wj = k + 1; }
    if (r2k > longest) { longest = r2k; wi = 2; wj = k + 1; }
    std::ostringstream msg;
    msg << "G violates the triangle inequality on nodes 1, 2, " << k + 1;
    throw InconsistentDistanceError(msg.str(), wi, wj, -yk2);
  }
  const double yk = std::sqrt(yk2);

  Coordinates coords = Coordinates::Zero(n, 3);
  coords.row(1) << r12, 0.0, 0.0;
  coords.row(k) << xk, yk, 0.0;

  auto in_plane = [&](int q) {
    const double r1 = G(0, q);
    const double x = (r12 * r12 + r1 * r1 - G(1, q) * G(1, q)) / (2.0 * r12);
    const double y = (r1 * r1 - G(k, q) * G(k, q) + xk * xk + yk * yk - 2.0 * x * xk) / (2.0 * yk);
    return std::pair{x, y};
  };

  if (l >= 0) {
    const auto [xl, yl] = in_plane(l);
    const double zl = std::sqrt(std::max(0.0, G(0, l) * G(0, l) - xl * xl - yl * yl));
    coords.row(l) << xl, yl, zl;
    const double a_k = xk * xk + yk * yk;
    const double a_l = xl * xl + yl * yl + zl * zl;
    for (int q = 0; q < n; ++q) {
      if (q == 0 || q == 1 || q == k || q == l) continue;
      // 2 A_m . x = |A_m|^2 + r_1q^2 - r_mq^2, triangular in (x, y, z).
      const double r1 = G(0, q) * G(0, q);
      const double x = (r12 * r12 + r1 - G(1, q) * G(1, q)) / (2.0 * r12);
      const double y = (a_k + r1 - G(k, q) * G(k, q) - 2.0 * xk * x) / (2.0 * yk);
      const double z = (a_l + r1 - G(l, q) * G(l, q) - 2.0 * xl * x - 2.0 * yl * y) / (2.0 * zl);
      coords.row(q) << x, y, z;
    }
  } else {
    for (int q = 2; q < n; ++q) {
      if (q == k) continue;
      const auto [x, y] = in_plane(q);
      coords.row(q) << x, y, 0.0;
    }
  }

  double worst = 0.0;
  int wi = 0, wj = 0;
  auto check_pair = [&](int i, int j) {
    const double res = std::abs((coords.row(i) - coords.row(j)).norm() - G(i, j));
    if (res > worst || std::isnan(res)) {
      worst = std::isnan(res) ? std::numeric_limits<double>::infinity() : res;
      wi = i + 1;
      wj = j + 1;
    }
  };
  if (options.verify) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) check_pair(i, j);
    if (worst > tau) {
      std::ostringstream msg;
      msg << "G is not a 3D Euclidean distance matrix: entry (" << wi << ", " << wj << ") is off by " << worst;
      throw InconsistentDistanceError(msg.str(), wi, wj, worst);
    }
  } else {
    for (const auto& [i, j] : independent_entries(G)) check_pair(i, j);
  }

  EmbeddingResult reference{coords, l >= 0 ? Chirality::Reference : Chirality::Achiral, worst, anchors};
  EmbeddingResult mirrored = reference;
  if (l >= 0) {
    mirrored.coordinates.col(2) *= -1.0;
    mirrored.chirality = Chirality::Mirrored;
  }
  return {std::move(reference), std::move(mirrored)};
}

std::vector<std::pair<int, int>> independent_entries(const Matrix& G) {
  const std::array<int, 4> anchors = find_anchors(G);
  const auto n = static_cast<int>(G.rows());
  std::vector<int> used;
  for (int a : anchors)
    if (a >= 0) used.push_back(a);
  std::vector<std::pair<int, int>> out;
  for (std::size_t a = 0; a < used.size(); ++a)
    for (std::size_t b = a + 1; b < used.size(); ++b)
      out.emplace_back(std::min(used[a], used[b]), std::max(used[a], used[b]));
  for (int q = 0; q < n; ++q) {
    if (std::find(used.begin(), used.end(), q) != used.end()) continue;
    for (int a : used) out.emplace_back(std::min(a, q), std::max(a, q));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Third axis index and sign so that (p, q, c) forms a right-handed triple.
Vec3 complete_axis(int p, int q, const Vec3& ep, const Vec3& eq, int& c) {
  c = 3 - p - q;
  const bool even = (p == 0 && q == 1) || (p == 1 && q == 2) || (p == 2 && q == 0);
  return even ? Vec3(ep.cross(eq)) : Vec3(eq.cross(ep));
}

void check_orthogonal(const Vec3& a, const Vec3& b, int da, int db) {
  if (std::abs(a.dot(b)) > 1e-6 * a.norm() * b.norm())
    throw FrameError("periodic directions " + std::to_string(da + 1) + " and " + std::to_string(db + 1) +
                     " are not orthogonal");
}

struct AxisInfo {
  std::array<std::optional<std::pair<int, int>>, 3> pair;
  int dimension = 0;
};

AxisInfo packing_axes(const IntMatrix& P, const Matrix& G, double tau) {
  AxisInfo info;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const int p = P(i, j);
      if (p <= 0) continue;
      auto& slot = info.pair[static_cast<std::size_t>(p - 1)];
      if (!slot) {
        slot = std::pair{static_cast<int>(i), static_cast<int>(j)};
        ++info.dimension;
      } else if (std::abs(G(i, j) - G(slot->first, slot->second)) > tau) {
        throw FrameError("packing pairs on axis " + std::to_string(p) + " have unequal lengths");
      }
    }
  }
  return info;
}

UnitCell align(const EmbeddingResult& e, const AxisInfo& axes, const Matrix& G) {
  const Coordinates& x = e.coordinates;
  std::array<Vec3, 3> v;
  std::vector<int> present;
  for (int d = 0; d < 3; ++d) {
    if (!axes.pair[static_cast<std::size_t>(d)]) continue;
    const auto [i, j] = *axes.pair[static_cast<std::size_t>(d)];
    v[static_cast<std::size_t>(d)] = (x.row(j) - x.row(i)).transpose();
    present.push_back(d);
  }
  for (std::size_t a = 0; a < present.size(); ++a)
    for (std::size_t b = a + 1; b < present.size(); ++b)
      check_orthogonal(v[static_cast<std::size_t>(present[a])], v[static_cast<std::size_t>(present[b])], present[a],
                       present[b]);

  Eigen::Matrix3d frame;  // column d is the unit direction of axis d
  if (present.size() == 3) {
    Eigen::Matrix3d V;
    for (int d = 0; d < 3; ++d) V.col(d) = v[static_cast<std::size_t>(d)].normalized();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(V, Eigen::ComputeFullU | Eigen::ComputeFullV);
    frame = svd.matrixU() * svd.matrixV().transpose();
  } else if (present.size() == 2) {
    const int p = present[0];
    const int q = present[1];
    const Vec3 ep = v[static_cast<std::size_t>(p)].normalized();
    const Vec3 eq = (v[static_cast<std::size_t>(q)] - v[static_cast<std::size_t>(q)].dot(ep) * ep).normalized();
    int c = 0;
    const Vec3 ec = complete_axis(p, q, ep, eq, c);
    frame.col(p) = ep;
    frame.col(q) = eq;
    frame.col(c) = ec;
  } else if (present.size() == 1) {
    const int p = present[0];
    const Vec3 ep = v[static_cast<std::size_t>(p)].normalized();
    int seed = 0;
    for (int t = 1; t < 3; ++t)
      if (std::abs(ep[t]) < std::abs(ep[seed])) seed = t;
    const Vec3 s = Vec3::Unit(seed);
    const int q = p == 0 ? 1 : 0;
    const Vec3 eq = (s - s.dot(ep) * ep).normalized();
    int c = 0;
    const Vec3 ec = complete_axis(std::min(p, q), std::max(p, q), p < q ? ep : eq, p < q ? eq : ep, c);
    frame.col(p) = ep;
    frame.col(q) = eq;
    frame.col(c) = ec;
  } else {
    frame.setIdentity();
  }

  Coordinates aligned = x * frame;
  const Eigen::RowVector3d mins = aligned.colwise().minCoeff();
  aligned.rowwise() -= mins;
  Vec3 lengths;
  for (int d = 0; d < 3; ++d) {
    if (const auto& pr = axes.pair[static_cast<std::size_t>(d)]; pr)
      lengths[d] = G(pr->first, pr->second);
    else
      lengths[d] = aligned.col(d).maxCoeff();
  }
  const double snap = 1e-12 * lengths.maxCoeff();
  UnitCell cell;
  cell.obb_lengths = lengths;
  cell.nodes.reserve(static_cast<std::size_t>(aligned.rows()));
  for (Eigen::Index q = 0; q < aligned.rows(); ++q) {
    Vec3 p = aligned.row(q).transpose();
    for (int d = 0; d < 3; ++d) {
      if (std::abs(p[d]) <= snap) p[d] = 0.0;
      else if (std::abs(p[d] - lengths[d]) <= snap) p[d] = lengths[d];
    }
    cell.nodes.push_back({static_cast<int>(q + 1), p});
  }
  return cell;
}

}  // namespace

FrameRecovery recover_frame(const std::pair<EmbeddingResult, EmbeddingResult>& embedding, const IntMatrix& P,
                            const Matrix& G, double distance_tolerance) {
  const auto n = embedding.first.coordinates.rows();
  if (P.rows() != n || G.rows() != n) throw DimensionError("embedding, P and G sizes differ");
  const AxisInfo axes = packing_axes(P, G, distance_tolerance);
  FrameRecovery out;
  out.periodic_dimension = axes.dimension;

  if (axes.dimension == 3) {
    const Coordinates& x = embedding.first.coordinates;
    Eigen::Matrix3d V;
    for (int d = 0; d < 3; ++d) {
      const auto [i, j] = *axes.pair[static_cast<std::size_t>(d)];
      V.col(d) = (x.row(j) - x.row(i)).transpose();
    }
    const double det = V.determinant();
    if (std::abs(det) <= 1e-9 * V.col(0).norm() * V.col(1).norm() * V.col(2).norm())
      throw FrameError("periodic directions are not independent");
    const EmbeddingResult& chosen = det > 0.0 ? embedding.first : embedding.second;
    out.cell = align(chosen, axes, G);
    out.chosen = chosen.chirality;
    out.chirality_resolved = true;
    return out;
  }

  out.cell = align(embedding.first, axes, G);
  out.alternate = align(embedding.second, axes, G);
  out.chosen = embedding.first.chirality;
  out.chirality_resolved = false;
  return out;
}

std::vector<Strut> struts_from_descriptors(const DescriptorSet& desc) {
  std::vector<Strut> out;
  const auto n = static_cast<Eigen::Index>(desc.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (desc.D(i, j) != 0.0)
        out.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1), desc.Kt(i, j), desc.Kb(i, j), desc.D(i, j),
                       std::nullopt});
  return out;
}

UnitCell cell_from_embedding(const EmbeddingResult& embedding, const DescriptorSet& desc) {
  Coordinates x = embedding.coordinates;
  const Eigen::RowVector3d mins = x.colwise().minCoeff();
  x.rowwise() -= mins;
  UnitCell cell;
  cell.obb_lengths = x.colwise().maxCoeff().transpose();
  for (Eigen::Index q = 0; q < x.rows(); ++q) cell.nodes.push_back({static_cast<int>(q + 1), x.row(q).transpose()});
  cell.struts = struts_from_descriptors(desc);
  return cell;
}

UnitCell cell_from_line(const DescriptorSet& desc) {
  const Matrix& G = desc.G;
  const auto n = static_cast<Eigen::Index>(desc.size());
  UnitCell cell;
  std::vector<double> xs(static_cast<std::size_t>(n), 0.0);
  if (n >= 2 && G(0, 1) > 0.0) {
    const double r12 = G(0, 1);
    for (Eigen::Index q = 0; q < n; ++q)
      xs[static_cast<std::size_t>(q)] = (r12 * r12 + G(0, q) * G(0, q) - G(1, q) * G(1, q)) / (2.0 * r12);
  }
  const double lo = xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end());
  for (Eigen::Index q = 0; q < n; ++q)
    cell.nodes.push_back({static_cast<int>(q + 1), Vec3(xs[static_cast<std::size_t>(q)] - lo, 0.0, 0.0)});
  cell.obb_lengths = Vec3(xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end()) - lo, 0.0, 0.0);
  cell.struts = struts_from_descriptors(desc);
  return cell;
}

Reconstruction reconstruct(const DescriptorSet& desc, const ReconstructConfig& config) {
  check_structure(desc);
  const double gmax = max_finite(desc.G);
  const double tau = config.distance_tolerance ? *config.distance_tolerance : 1e-6 * gmax;
  const double eps = config.position_tolerance ? *config.position_tolerance : 1e-9 * gmax;

  EmbedOptions options;
  options.distance_tolerance = tau;
  const auto embedding = embed_nodes(desc.G, options);
  FrameRecovery frame = recover_frame(embedding, desc.P, desc.G, tau);

  Reconstruction out;
  out.periodic_dimension = frame.periodic_dimension;
  out.chirality_resolved = frame.chirality_resolved;
  out.chirality = frame.chosen;
  out.max_residual = embedding.first.max_residual;
  out.cell = std::move(frame.cell);
  out.cell.struts = struts_from_descriptors(desc);
  if (frame.alternate) {
    out.alternate = std::move(frame.alternate);
    out.alternate->struts = out.cell.struts;
  }

  if (!config.require_canonical_labeling) return out;

  auto match = [&](const UnitCell& candidate) -> bool {
    for (const auto& o : canonicalizer::orientations(candidate.obb_lengths, canonicalizer::ChiralityMode::Ignore)) {
      try {
        if (canonicalizer::order_nodes(candidate, o, eps).is_identity()) {
          out.matched_frame = o.frame_index;
          out.matched_mirrored = o.mirrored;
          return true;
        }
      } catch (const canonicalizer::AmbiguousOrderingError&) {
        continue;
      }
    }
    return false;
  };
  if (match(out.cell)) return out;
  if (out.alternate && match(*out.alternate)) {
    std::swap(out.cell, *out.alternate);
    out.chirality = out.chirality == Chirality::Reference ? Chirality::Mirrored : out.chirality;
    return out;
  }
  throw NonCanonicalLabelingError(
      "node labels match none of the 48 canonical orderings; canonicalize the descriptors first");
}

}  // namespace lattice::reconstructor

#include "lattice/canonicalizer.hpp"

#include "lattice/encoder.hpp"
#include "lattice/reconstructor.hpp"
#include "lattice/validator.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace lattice::canonicalizer {

AmbiguousOrderingError::AmbiguousOrderingError(int a, int b)
    : Error("nodes " + std::to_string(a) + " and " + std::to_string(b) +
            " share a quantized position; the canonical order is ambiguous"),
      first(a),
      second(b) {}

Eigen::Matrix3i FrameTransform::rotation() const {
  Eigen::Matrix3i r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = static_cast<int>(std::lround(matrix(i, j)));
  return r;
}

Vec3 FrameTransform::image_lengths(const Vec3& lengths) const {
  return matrix.block<3, 3>(0, 0).cwiseAbs() * lengths;
}

Vec3 FrameTransform::origin_vertex() const {
  return matrix.block<3, 3>(0, 0).transpose() * (-translation());
}

FrameTransform normalized_frame(const Eigen::Matrix3i& rotation, const Vec3& obb_lengths) {
  FrameTransform f;
  f.matrix.block<3, 3>(0, 0) = rotation.cast<double>();
  for (int r = 0; r < 3; ++r) {
    double t = 0.0;
    for (int c = 0; c < 3; ++c)
      if (rotation(r, c) < 0) t = obb_lengths[c];
    f.matrix(r, 3) = t;
  }
  return f;
}

std::vector<FrameTransform> canonical_frames(const Vec3& obb_lengths) {
  std::vector<FrameTransform> out;
  out.reserve(24);
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Eigen::Matrix3i r = Eigen::Matrix3i::Zero();
      for (int row = 0; row < 3; ++row) r(row, perm[static_cast<std::size_t>(row)]) = (signs >> row) & 1 ? -1 : 1;
      if (r.determinant() != 1) continue;
      out.push_back(normalized_frame(r, obb_lengths));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

FrameTransform frame_transform_matrix(Generator kind, double l1, double l3) {
  FrameTransform f;
  Eigen::Matrix4d& m = f.matrix;
  m.setZero();
  m(3, 3) = 1.0;
  switch (kind) {
    case Generator::Ro:  // (x1, x2, x3) -> (x3, x1, x2)
      m(0, 2) = 1.0;
      m(1, 0) = 1.0;
      m(2, 1) = 1.0;
      break;
    case Generator::TR1:  // (x2, l1 - x1, x3)
      m(0, 1) = 1.0;
      m(1, 0) = -1.0;
      m(1, 3) = l1;
      m(2, 2) = 1.0;
      break;
    case Generator::TR3:  // (l3 - x3, x2, x1)
      m(0, 2) = -1.0;
      m(0, 3) = l3;
      m(1, 1) = 1.0;
      m(2, 0) = 1.0;
      break;
  }
  return f;
}

// ---------------------------------------------------------------------------

Permutation::Permutation(std::vector<int> canonical_of)
    : canonical_of_(std::move(canonical_of)), input_of_(canonical_of_.size(), -1) {
  for (std::size_t j = 0; j < canonical_of_.size(); ++j) {
    const int c = canonical_of_[j];
    if (c < 0 || static_cast<std::size_t>(c) >= canonical_of_.size() || input_of_[static_cast<std::size_t>(c)] != -1)
      throw InvalidInputError("not a permutation");
    input_of_[static_cast<std::size_t>(c)] = static_cast<int>(j);
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return Permutation(std::move(v));
}

Permutation Permutation::from_labels(const std::vector<int>& labels) {
  std::vector<int> v;
  v.reserve(labels.size());
  for (int l : labels) v.push_back(l - 1);
  return Permutation(std::move(v));
}

IntMatrix Permutation::matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  IntMatrix m = IntMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(canonical_of_[static_cast<std::size_t>(j)], j) = 1;
  return m;
}

Permutation Permutation::inverse() const { return Permutation(input_of_); }

bool Permutation::is_identity() const {
  for (std::size_t j = 0; j < canonical_of_.size(); ++j)
    if (canonical_of_[j] != static_cast<int>(j)) return false;
  return true;
}

// ---------------------------------------------------------------------------

std::vector<Orientation> orientations(const Vec3& obb_lengths, ChiralityMode mode) {
  std::vector<Orientation> out;
  const auto frames = canonical_frames(obb_lengths);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    Orientation o;
    o.frame_index = static_cast<int>(k);
    o.signed_permutation = frames[k].rotation();
    o.matrix = frames[k].matrix;
    out.push_back(o);
  }
  if (mode == ChiralityMode::Ignore) {
    Eigen::Matrix4d mirror = Eigen::Matrix4d::Identity();
    mirror(0, 0) = -1.0;
    mirror(0, 3) = obb_lengths[0];
    for (std::size_t k = 0; k < frames.size(); ++k) {
      Orientation o;
      o.frame_index = static_cast<int>(k);
      o.mirrored = true;
      o.matrix = frames[k].matrix * mirror;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) o.signed_permutation(i, j) = static_cast<int>(std::lround(o.matrix(i, j)));
      out.push_back(o);
    }
  }
  return out;
}

namespace {

Permutation order_by(const UnitCell& cell, const Eigen::Matrix4d& m, double tol) {
  if (!(tol > 0.0)) throw DomainError("position tolerance must be positive");
  const std::size_t n = cell.nodes.size();
  std::vector<std::array<long long, 3>> keys(n);
  for (std::size_t q = 0; q < n; ++q) {
    const Vec3 u = m.block<3, 3>(0, 0) * cell.nodes[q].position + m.block<3, 1>(0, 3);
    for (int d = 0; d < 3; ++d) keys[q][static_cast<std::size_t>(d)] = std::llround(u[d] / tol);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  for (std::size_t r = 1; r < n; ++r)
    if (keys[static_cast<std::size_t>(order[r - 1])] == keys[static_cast<std::size_t>(order[r])])
      throw AmbiguousOrderingError(std::min(order[r - 1], order[r]) + 1, std::max(order[r - 1], order[r]) + 1);
  std::vector<int> canonical_of(n);
  for (std::size_t r = 0; r < n; ++r) canonical_of[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
  return Permutation(std::move(canonical_of));
}

}  // namespace

Permutation order_nodes(const UnitCell& cell, const FrameTransform& frame, double position_tolerance) {
  return order_by(cell, frame.matrix, position_tolerance);
}

Permutation order_nodes(const UnitCell& cell, const Orientation& orientation, double position_tolerance) {
  return order_by(cell, orientation.matrix, position_tolerance);
}

namespace {

template <typename M>
M permute(const M& m, const Permutation& pi) {
  const auto n = static_cast<Eigen::Index>(pi.size());
  if (m.rows() != n || m.cols() != n) throw DimensionError("matrix and permutation sizes differ");
  M out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      out(a, b) = m(pi.input_of(static_cast<int>(a)), pi.input_of(static_cast<int>(b)));
  return out;
}

}  // namespace

DescriptorSet permute_descriptors(const DescriptorSet& desc, const Permutation& pi) {
  return {permute(desc.G, pi), permute(desc.D, pi), permute(desc.Kt, pi), permute(desc.Kb, pi), permute(desc.P, pi)};
}

IntMatrix reframe_packing(const IntMatrix& P, const Eigen::Matrix3i& S) {
  std::array<int, 3> target{};
  std::array<int, 3> sign{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (S(b, a) != 0) {
        target[static_cast<std::size_t>(a)] = b + 1;
        sign[static_cast<std::size_t>(a)] = S(b, a);
      }
  IntMatrix out = P;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const int p = P(i, j);
      if (p == 0) continue;
      const auto a = static_cast<std::size_t>(std::abs(p) - 1);
      out(i, j) = (p > 0 ? 1 : -1) * sign[a] * target[a];
    }
  return out;
}

UnitCell relabel(const UnitCell& cell, const Permutation& pi) {
  if (pi.size() != cell.nodes.size()) throw DimensionError("cell and permutation sizes differ");
  UnitCell out;
  out.obb_lengths = cell.obb_lengths;
  out.nodes.resize(cell.nodes.size());
  for (std::size_t c = 0; c < cell.nodes.size(); ++c)
    out.nodes[c] = {static_cast<int>(c + 1), cell.nodes[static_cast<std::size_t>(pi.input_of(static_cast<int>(c)))].position};
  for (Strut s : cell.struts) {
    const int a = pi.canonical_of(s.i - 1) + 1;
    const int b = pi.canonical_of(s.j - 1) + 1;
    s.i = std::min(a, b);
    s.j = std::max(a, b);
    out.struts.push_back(s);
  }
  std::sort(out.struts.begin(), out.struts.end(),
            [](const Strut& x, const Strut& y) { return std::pair{x.i, x.j} < std::pair{y.i, y.j}; });
  return out;
}

std::string format_scalar(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

// Entry strings of a descriptor set, formatted once and reused per orientation.
struct FormattedEntries {
  Eigen::Index n = 0;
  std::array<std::vector<std::string>, 4> real;

  explicit FormattedEntries(const DescriptorSet& d) : n(static_cast<Eigen::Index>(d.size())) {
    const std::array<const Matrix*, 4> ms{&d.G, &d.D, &d.Kt, &d.Kb};
    for (std::size_t k = 0; k < 4; ++k) {
      real[k].reserve(static_cast<std::size_t>(n * n));
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) real[k].push_back(format_scalar((*ms[k])(i, j)));
    }
  }

  std::string serialize(const Permutation& pi, const IntMatrix& P) const {
    static constexpr std::array<const char*, 4> names{"G=", "D=", "Kt=", "Kb="};
    std::string s = "n=" + std::to_string(n) + "\n";
    for (std::size_t k = 0; k < 4; ++k) {
      s += names[k];
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          if (a || b) s += ',';
          s += real[k][static_cast<std::size_t>(pi.input_of(static_cast<int>(a)) * n + pi.input_of(static_cast<int>(b)))];
        }
      s += '\n';
    }
    s += "P=";
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        if (a || b) s += ',';
        s += std::to_string(P(a, b));
      }
    s += '\n';
    return s;
  }
};

}  // namespace

std::string serialize(const DescriptorSet& desc) {
  return FormattedEntries(desc).serialize(Permutation::identity(desc.size()), desc.P);
}

std::string Fingerprint::hex() const { return to_hex(digest); }

std::array<std::uint8_t, 32> sha256(const std::string& bytes) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw Error("SHA-256 digest failed");
  return out;
}

std::string to_hex(const std::array<std::uint8_t, 32>& digest) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto byte : digest) {
    s += digits[byte >> 4];
    s += digits[byte & 0xF];
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

int packing_dimension(const IntMatrix& P) {
  std::array<bool, 3> seen{};
  for (Eigen::Index i = 0; i < P.size(); ++i)
    if (P.data()[i] > 0) seen[static_cast<std::size_t>(P.data()[i] - 1)] = true;
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

// Without three periodic axes the descriptors cannot tell a cell from its
// mirror image, so the improper orientations are always included.
ChiralityMode effective_mode(ChiralityMode mode, const IntMatrix& P) {
  return packing_dimension(P) < 3 ? ChiralityMode::Ignore : mode;
}

void reject_invalid(const validator::ValidationReport& report) {
  validator::ValidationReport blocking;
  blocking.periodic_dimension = report.periodic_dimension;
  for (const auto& v : report.violations)
    if (v.rule != validator::Rule::PeriodicityDefect) blocking.violations.push_back(v);
  if (!blocking.clean()) throw validator::ValidationFailed(std::move(blocking));
}

void search(const UnitCell& cell, const DescriptorSet& desc, const FormattedEntries& entries, ChiralityMode mode,
            double tol, std::optional<CanonicalForm>& best) {
  for (const auto& o : orientations(cell.obb_lengths, mode)) {
    const Permutation pi = order_nodes(cell, o, tol);
    const IntMatrix P = reframe_packing(permute(desc.P, pi), o.signed_permutation);
    std::string s = entries.serialize(pi, P);
    if (!best || s < best->serialization) {
      DescriptorSet d = permute_descriptors(desc, pi);
      d.P = P;
      best = CanonicalForm{std::move(d), pi, o, std::move(s)};
    }
  }
}

}  // namespace

CanonicalForm canonical_form(const UnitCell& cell, const FingerprintConfig& config) {
  const double tol = config.position_tolerance ? *config.position_tolerance : default_position_tolerance(cell);
  encoder::EncodeConfig ec;
  ec.position_tolerance = tol;
  ec.run_validation = false;
  const DescriptorSet desc = encoder::encode(cell, ec);
  if (config.validate) {
    validator::ValidateConfig vc;
    vc.position_tolerance = tol;
    vc.distance_tolerance = config.distance_tolerance;
    reject_invalid(validator::validate(desc, &cell, vc));
  }
  const FormattedEntries entries(desc);
  std::optional<CanonicalForm> best;
  search(cell, desc, entries, effective_mode(config.mode, desc.P), tol, best);
  return std::move(*best);
}

CanonicalForm canonical_form(const DescriptorSet& desc, const FingerprintConfig& config) {
  check_structure(desc);
  const double tol = config.position_tolerance ? *config.position_tolerance : 1e-9 * max_finite(desc.G);
  if (config.validate) {
    validator::ValidateConfig vc;
    vc.position_tolerance = tol;
    vc.distance_tolerance = config.distance_tolerance;
    reject_invalid(validator::validate(desc, nullptr, vc));
  }
  reconstructor::ReconstructConfig rc;
  rc.distance_tolerance = config.distance_tolerance;
  rc.position_tolerance = tol;
  rc.require_canonical_labeling = false;
  const auto rec = reconstructor::reconstruct(desc, rc);

  const FormattedEntries entries(desc);
  const ChiralityMode mode = effective_mode(config.mode, desc.P);
  std::optional<CanonicalForm> best;
  search(rec.cell, desc, entries, mode, tol, best);
  if (rec.alternate) search(*rec.alternate, desc, entries, mode, tol, best);
  return std::move(*best);
}

namespace {

Fingerprint make_fingerprint(CanonicalForm form, ChiralityMode mode) {
  Fingerprint f;
  f.digest = sha256(form.serialization);
  f.serialization = std::move(form.serialization);
  f.mode = mode;
  return f;
}

}  // namespace

Fingerprint fingerprint(const UnitCell& cell, const FingerprintConfig& config) {
  return make_fingerprint(canonical_form(cell, config), config.mode);
}

Fingerprint fingerprint(const DescriptorSet& desc, const FingerprintConfig& config) {
  return make_fingerprint(canonical_form(desc, config), config.mode);
}

UnitCell canonicalize_cell(const UnitCell& cell, const FingerprintConfig& config) {
  const CanonicalForm form = canonical_form(cell, config);
  UnitCell out = relabel(cell, form.permutation);
  for (auto& node : out.nodes) node.position = form.orientation.apply(node.position);
  out.obb_lengths = form.orientation.matrix.block<3, 3>(0, 0).cwiseAbs() * cell.obb_lengths;
  const double snap = 1e-12 * out.obb_lengths.maxCoeff();
  for (auto& node : out.nodes)
    for (int d = 0; d < 3; ++d) {
      if (std::abs(node.position[d]) <= snap) node.position[d] = 0.0;
      else if (std::abs(node.position[d] - out.obb_lengths[d]) <= snap) node.position[d] = out.obb_lengths[d];
    }
  return out;
}

bool equivalent(const UnitCell& a, const UnitCell& b, const FingerprintConfig& config) {
  return fingerprint(a, config) == fingerprint(b, config);
}

bool equivalent(const DescriptorSet& a, const DescriptorSet& b, const FingerprintConfig& config) {
  return fingerprint(a, config) == fingerprint(b, config);
}

}  // namespace lattice::canonicalizer

#pragma once

#include "lattice/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lattice::canonicalizer {

class AmbiguousOrderingError : public Error {
 public:
  AmbiguousOrderingError(int a, int b);
  int first;
  int second;
};

/// Homogeneous 4x4 transform whose rotation block is a signed permutation.
struct FrameTransform {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();

  Eigen::Matrix3i rotation() const;
  Vec3 translation() const { return matrix.block<3, 1>(0, 3); }
  Vec3 apply(const Vec3& x) const { return matrix.block<3, 3>(0, 0) * x + translation(); }
  /// Box lengths after the transform (axis lengths permute with the rotation).
  Vec3 image_lengths(const Vec3& lengths) const;
  /// The OBB vertex (in input coordinates) that becomes the new origin.
  Vec3 origin_vertex() const;
  FrameTransform compose(const FrameTransform& inner) const { return {matrix * inner.matrix}; }

  bool operator==(const FrameTransform&) const = default;
};

/// The 24 right-handed frames of an L1 x L2 x L3 box, each mapping the box
/// onto an axis-aligned box with its minimum corner at the origin.
std::vector<FrameTransform> canonical_frames(const Vec3& obb_lengths);

/// Translation that puts the image of [0,L] under `rotation` at the origin.
FrameTransform normalized_frame(const Eigen::Matrix3i& rotation, const Vec3& obb_lengths);

enum class Generator { Ro, TR1, TR3 };

/// The cyclic axis shift Ro and the origin moves TR1 (l1) / TR3 (l3).
FrameTransform frame_transform_matrix(Generator kind, double l1, double l3);

/// Bijection from input labels to canonical labels (stored 0-based).
class Permutation {
 public:
  Permutation() = default;
  /// canonical_of[j] = canonical label of the node with input label j (0-based).
  explicit Permutation(std::vector<int> canonical_of);
  static Permutation identity(std::size_t n);
  /// 1-based mapping: entry j-1 holds the canonical label of input node j.
  static Permutation from_labels(const std::vector<int>& labels);

  std::size_t size() const { return canonical_of_.size(); }
  int canonical_of(int input) const { return canonical_of_[static_cast<std::size_t>(input)]; }
  int input_of(int canonical) const { return input_of_[static_cast<std::size_t>(canonical)]; }
  /// Pi with Pi(canonical, input) = 1.
  IntMatrix matrix() const;
  Permutation inverse() const;
  bool is_identity() const;
  bool operator==(const Permutation&) const = default;

 private:
  std::vector<int> canonical_of_;
  std::vector<int> input_of_;
};

enum class ChiralityMode { Strict, Ignore };

/// A frame optionally preceded by the mirror x1 -> L1 - x1. The linear part
/// is `signed_permutation` (det -1 when mirrored).
struct Orientation {
  int frame_index = 0;
  bool mirrored = false;
  Eigen::Matrix3i signed_permutation = Eigen::Matrix3i::Identity();
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();

  Vec3 apply(const Vec3& x) const { return matrix.block<3, 3>(0, 0) * x + matrix.block<3, 1>(0, 3); }
};

/// 24 orientations (strict) or 48 (ignore: the 24 frames after the mirror).
std::vector<Orientation> orientations(const Vec3& obb_lengths, ChiralityMode mode);

/// Lexicographic (u1, u2, u3) order of transformed coordinates quantized to
/// multiples of `position_tolerance`. Throws AmbiguousOrderingError on ties.
Permutation order_nodes(const UnitCell& cell, const FrameTransform& frame, double position_tolerance);
Permutation order_nodes(const UnitCell& cell, const Orientation& orientation, double position_tolerance);

/// Each matrix M becomes Pi M Pi^T. Throws DimensionError on size mismatch.
DescriptorSet permute_descriptors(const DescriptorSet& desc, const Permutation& pi);

/// Axis labels of P re-expressed after a signed permutation of the axes.
IntMatrix reframe_packing(const IntMatrix& P, const Eigen::Matrix3i& signed_permutation);

/// Relabels a cell: node with input id j gets id canonical_of(j-1)+1.
UnitCell relabel(const UnitCell& cell, const Permutation& pi);

/// Byte-exact serialization: lines "n=", "G=", "D=", "Kt=", "Kb=", "P=" with
/// row-major comma-separated entries; scalars as %.12g, -0 written as 0.
std::string serialize(const DescriptorSet& desc);

/// Scalar rendering used by serialize().
std::string format_scalar(double x);

struct Fingerprint {
  std::string serialization;
  std::array<std::uint8_t, 32> digest{};
  ChiralityMode mode = ChiralityMode::Strict;

  std::string hex() const;
  bool operator==(const Fingerprint& o) const { return serialization == o.serialization; }
};

struct CanonicalForm {
  DescriptorSet descriptors;
  Permutation permutation;
  Orientation orientation;
  std::string serialization;
};

struct FingerprintConfig {
  ChiralityMode mode = ChiralityMode::Strict;
  std::optional<double> position_tolerance;
  std::optional<double> distance_tolerance;
  /// Reject inputs whose validation report has violations other than PeriodicityDefect.
  bool validate = true;
};

CanonicalForm canonical_form(const UnitCell& cell, const FingerprintConfig& config = {});
/// Reconstructs coordinates first; labels need not be canonical.
CanonicalForm canonical_form(const DescriptorSet& desc, const FingerprintConfig& config = {});

Fingerprint fingerprint(const UnitCell& cell, const FingerprintConfig& config = {});
Fingerprint fingerprint(const DescriptorSet& desc, const FingerprintConfig& config = {});

/// The cell re-expressed in the minimizing orientation with canonical labels.
UnitCell canonicalize_cell(const UnitCell& cell, const FingerprintConfig& config = {});

bool equivalent(const UnitCell& a, const UnitCell& b, const FingerprintConfig& config = {});
bool equivalent(const DescriptorSet& a, const DescriptorSet& b, const FingerprintConfig& config = {});

std::array<std::uint8_t, 32> sha256(const std::string& bytes);
std::string to_hex(const std::array<std::uint8_t, 32>& digest);

}  // namespace lattice::canonicalizer
